#pragma once

#include <string>
#include <vector>

namespace hbtrack::aml {

/// Labeled body/head embedding sets with pairwise box distances, the input to
/// the associative embedding loss. Embeddings all share one dimension; the
/// distance matrices are symmetric with zero diagonal.
struct LossBatch {
    std::vector<std::vector<double>> body_embeddings;    // M x D
    std::vector<std::vector<double>> head_embeddings;    // N x D
    std::vector<int> body_identity;                      // M
    std::vector<int> head_identity;                      // N
    std::vector<std::vector<double>> body_box_distances; // M x M
    std::vector<std::vector<double>> head_box_distances; // N x N
};

struct LossWeights {
    double mu = 1.0;     // same-part term weight
    double beta = 1.5;   // cross-part term weight
    double delta = 2.0;  // pushing margin
    double sigma = 1.0;  // pull weight in the combined loss
    double tau = 1.0;    // push weight in the combined loss
    // When true, sums run over every index pair instead of being restricted
    // to same-identity pairs (pull) / different-identity pairs (push).
    bool literal_sums = false;
};

/// Throws std::invalid_argument when sizes or dimensions are inconsistent.
void validate(const LossBatch& batch, const LossWeights& weights);

/// Distance-weighted squared-distance attraction over same-identity pairs:
/// mu * (bb + hh same-part terms, normalized by M^2 / N^2) plus beta times the
/// matched body-head term (normalized by M*N).
double pull_loss(const LossBatch& batch, const LossWeights& weights);

/// Hinge repulsion max(0, delta - |e_i - e_j|)^2 over different-identity
/// pairs, same structure and normalizers as pull_loss. Pairs at or beyond the
/// margin contribute nothing.
double push_loss(const LossBatch& batch, const LossWeights& weights);

/// sigma * pull_loss + tau * push_loss.
double total_loss(const LossBatch& batch, const LossWeights& weights);

struct Gradient {
    std::vector<std::vector<double>> body;  // M x D, d(total_loss)/d(body embedding)
    std::vector<std::vector<double>> head;  // N x D
};

/// Analytic gradient of total_loss with respect to every embedding. The hinge
/// subgradient is zero at and beyond the margin; coincident different-identity
/// embeddings also get a zero push gradient (the direction is undefined).
Gradient gradient(const LossBatch& batch, const LossWeights& weights);

/// JSON Lines round-trip for batches so external training code can exchange
/// test vectors. One batch per line.
std::string batch_to_json(const LossBatch& batch);
LossBatch batch_from_json(const std::string& line);

}  // namespace hbtrack::aml
