#include "hbtrack/aml.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hbtrack::aml {
namespace {

using Embeddings = std::vector<std::vector<double>>;

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

void check_distance_matrix(const std::vector<std::vector<double>>& m, std::size_t n, const char* name) {
    if (m.size() != n) throw std::invalid_argument(std::string(name) + ": wrong row count");
    for (std::size_t i = 0; i < n; ++i) {
        if (m[i].size() != n) throw std::invalid_argument(std::string(name) + ": matrix not square");
        if (std::abs(m[i][i]) > 1e-12) throw std::invalid_argument(std::string(name) + ": nonzero diagonal");
        for (std::size_t j = 0; j < n; ++j) {
            const double v = m[i][j];
            if (!std::isfinite(v) || v < 0.0) {
                throw std::invalid_argument(std::string(name) + ": entries must be finite and >= 0");
            }
            if (std::abs(v - m[j][i]) > 1e-9) {
                throw std::invalid_argument(std::string(name) + ": matrix not symmetric");
            }
        }
    }
}

// Same-part pull: (1/K^2) sum_{i != j} e^{d_ij} |e_i - e_j|^2, with the sum
// restricted to same-identity pairs unless literal_sums is set.
double pull_same_part(const Embeddings& e, const std::vector<int>& ids,
                      const std::vector<std::vector<double>>& dist, bool literal) {
    const std::size_t n = e.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (!literal && ids[i] != ids[j]) continue;
            s += std::exp(dist[i][j]) * squared_distance(e[i], e[j]);
        }
    }
    return s / (static_cast<double>(n) * static_cast<double>(n));
}

double push_same_part(const Embeddings& e, const std::vector<int>& ids, double delta, bool literal) {
    const std::size_t n = e.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (!literal && ids[i] == ids[j]) continue;
            const double hinge = std::max(0.0, delta - std::sqrt(squared_distance(e[i], e[j])));
            s += hinge * hinge;
        }
    }
    return s / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace

void validate(const LossBatch& batch, const LossWeights& weights) {
    if (weights.mu < 0.0 || weights.beta < 0.0 || weights.sigma < 0.0 || weights.tau < 0.0 ||
        !(weights.delta > 0.0)) {
        throw std::invalid_argument("LossWeights: mu/beta/sigma/tau must be >= 0 and delta > 0");
    }
    const std::size_t m = batch.body_embeddings.size();
    const std::size_t n = batch.head_embeddings.size();
    if (batch.body_identity.size() != m || batch.head_identity.size() != n) {
        throw std::invalid_argument("LossBatch: identity label count mismatch");
    }
    std::size_t dim = 0;
    for (const auto& v : batch.body_embeddings) {
        if (dim == 0) dim = v.size();
        if (v.size() != dim || v.empty()) throw std::invalid_argument("LossBatch: embedding dimension mismatch");
    }
    for (const auto& v : batch.head_embeddings) {
        if (dim == 0) dim = v.size();
        if (v.size() != dim || v.empty()) throw std::invalid_argument("LossBatch: embedding dimension mismatch");
    }
    check_distance_matrix(batch.body_box_distances, m, "body_box_distances");
    check_distance_matrix(batch.head_box_distances, n, "head_box_distances");
}

double pull_loss(const LossBatch& batch, const LossWeights& weights) {
    validate(batch, weights);
    const std::size_t m = batch.body_embeddings.size();
    const std::size_t n = batch.head_embeddings.size();

    const double bb = pull_same_part(batch.body_embeddings, batch.body_identity,
                                     batch.body_box_distances, weights.literal_sums);
    const double hh = pull_same_part(batch.head_embeddings, batch.head_identity,
                                     batch.head_box_distances, weights.literal_sums);

    double bh = 0.0;
    if (m > 0 && n > 0) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (!weights.literal_sums && batch.body_identity[i] != batch.head_identity[j]) continue;
                bh += squared_distance(batch.body_embeddings[i], batch.head_embeddings[j]);
            }
        }
        bh /= static_cast<double>(m) * static_cast<double>(n);
    }
    return weights.mu * (bb + hh) + weights.beta * bh;
}

double push_loss(const LossBatch& batch, const LossWeights& weights) {
    validate(batch, weights);
    const std::size_t m = batch.body_embeddings.size();
    const std::size_t n = batch.head_embeddings.size();

    const double bb = push_same_part(batch.body_embeddings, batch.body_identity, weights.delta,
                                     weights.literal_sums);
    const double hh = push_same_part(batch.head_embeddings, batch.head_identity, weights.delta,
                                     weights.literal_sums);

    double bh = 0.0;
    if (m > 0 && n > 0) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (!weights.literal_sums && batch.body_identity[i] == batch.head_identity[j]) continue;
                const double hinge = std::max(
                    0.0, weights.delta -
                             std::sqrt(squared_distance(batch.body_embeddings[i], batch.head_embeddings[j])));
                bh += hinge * hinge;
            }
        }
        bh /= static_cast<double>(m) * static_cast<double>(n);
    }
    return weights.mu * (bb + hh) + weights.beta * bh;
}

double total_loss(const LossBatch& batch, const LossWeights& weights) {
    return weights.sigma * pull_loss(batch, weights) + weights.tau * push_loss(batch, weights);
}

Gradient gradient(const LossBatch& batch, const LossWeights& weights) {
    validate(batch, weights);
    const std::size_t m = batch.body_embeddings.size();
    const std::size_t n = batch.head_embeddings.size();
    const std::size_t dim = m > 0 ? batch.body_embeddings[0].size()
                                  : (n > 0 ? batch.head_embeddings[0].size() : 0);

    Gradient g;
    g.body.assign(m, std::vector<double>(dim, 0.0));
    g.head.assign(n, std::vector<double>(dim, 0.0));

    // d/de_i of w * |e_i - e_j|^2 is 2w (e_i - e_j); the hinge term
    // w * max(0, delta - r)^2 differentiates to -2w max(0, delta - r)/r (e_i - e_j).
    auto add_pair = [&](std::vector<double>& gi, std::vector<double>& gj,
                        const std::vector<double>& ei, const std::vector<double>& ej, double w) {
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = 2.0 * w * (ei[k] - ej[k]);
            gi[k] += d;
            gj[k] -= d;
        }
    };

    const bool literal = weights.literal_sums;
    const double pull_w = weights.sigma;
    const double push_w = weights.tau;

    auto same_part = [&](const Embeddings& e, const std::vector<int>& ids,
                         const std::vector<std::vector<double>>& dist,
                         std::vector<std::vector<double>>& grad) {
        const std::size_t count = e.size();
        if (count < 2) return;
        const double norm = weights.mu / (static_cast<double>(count) * static_cast<double>(count));
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t j = 0; j < count; ++j) {
                if (i == j) continue;
                const bool same_id = ids[i] == ids[j];
                if (literal || same_id) {
                    add_pair(grad[i], grad[j], e[i], e[j], pull_w * norm * std::exp(dist[i][j]));
                }
                if (literal || !same_id) {
                    const double r = std::sqrt(squared_distance(e[i], e[j]));
                    if (r > 1e-12 && r < weights.delta) {
                        add_pair(grad[i], grad[j], e[i], e[j],
                                 -push_w * norm * (weights.delta - r) / r);
                    }
                }
            }
        }
    };
    same_part(batch.body_embeddings, batch.body_identity, batch.body_box_distances, g.body);
    same_part(batch.head_embeddings, batch.head_identity, batch.head_box_distances, g.head);

    if (m > 0 && n > 0) {
        const double norm = weights.beta / (static_cast<double>(m) * static_cast<double>(n));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const bool same_id = batch.body_identity[i] == batch.head_identity[j];
                const auto& eb = batch.body_embeddings[i];
                const auto& eh = batch.head_embeddings[j];
                if (literal || same_id) {
                    add_pair(g.body[i], g.head[j], eb, eh, pull_w * norm);
                }
                if (literal || !same_id) {
                    const double r = std::sqrt(squared_distance(eb, eh));
                    if (r > 1e-12 && r < weights.delta) {
                        add_pair(g.body[i], g.head[j], eb, eh, -push_w * norm * (weights.delta - r) / r);
                    }
                }
            }
        }
    }
    return g;
}

std::string batch_to_json(const LossBatch& batch) {
    nlohmann::json j;
    j["body_embeddings"] = batch.body_embeddings;
    j["head_embeddings"] = batch.head_embeddings;
    j["body_identity"] = batch.body_identity;
    j["head_identity"] = batch.head_identity;
    j["body_box_distances"] = batch.body_box_distances;
    j["head_box_distances"] = batch.head_box_distances;
    return j.dump();
}

LossBatch batch_from_json(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("LossBatch: malformed JSON: ") + e.what());
    }
    LossBatch batch;
    try {
        j.at("body_embeddings").get_to(batch.body_embeddings);
        j.at("head_embeddings").get_to(batch.head_embeddings);
        j.at("body_identity").get_to(batch.body_identity);
        j.at("head_identity").get_to(batch.head_identity);
        j.at("body_box_distances").get_to(batch.body_box_distances);
        j.at("head_box_distances").get_to(batch.head_box_distances);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("LossBatch: bad schema: ") + e.what());
    }
    return batch;
}

}  // namespace hbtrack::aml
