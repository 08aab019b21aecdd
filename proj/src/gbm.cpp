#include "ralpha/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

namespace ralpha {

using nlohmann::json;

Matrix Matrix::select_rows(const std::vector<std::size_t>& idx) const {
    Matrix out(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy_n(row(idx[i]), cols, out.data.begin() + static_cast<std::ptrdiff_t>(i * cols));
    return out;
}

Matrix Matrix::select_cols(const std::vector<std::size_t>& idx) const {
    Matrix out(rows, idx.size());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < idx.size(); ++j) out.at(r, j) = at(r, idx[j]);
    return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logistic_loss(double y, double score) {
    // -(y log p + (1-y) log(1-p)), written in the numerically stable form
    double m = std::max(score, 0.0);
    return m - y * score + std::log(std::exp(-m) + std::exp(score - m));
}

double logistic_grad(double y, double score) { return sigmoid(score) - y; }

double logistic_hess(double /*y*/, double score) {
    double p = sigmoid(score);
    return p * (1.0 - p);
}

double Tree::predict(const double* row) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0)
        i = static_cast<std::size_t>(row[nodes[i].feature] < nodes[i].threshold ? nodes[i].left
                                                                                : nodes[i].right);
    return nodes[i].weight;
}

std::vector<std::vector<std::uint32_t>> presort_columns(const Matrix& X, int threads) {
    std::vector<std::vector<std::uint32_t>> sorted(X.cols);
    parallel_for(X.cols, threads, [&](std::size_t j) {
        auto& order = sorted[j];
        order.resize(X.rows);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return X.at(a, j) < X.at(b, j);
        });
    });
    return sorted;
}

namespace {

struct SplitCandidate {
    double gain = 0.0;
    double threshold = 0.0;
    double gl = 0.0, hl = 0.0;  // left child stats at the boundary
    bool valid = false;
};

inline double leaf_objective(double g, double h, double lambda) { return g * g / (h + lambda); }

}  // namespace

Tree build_tree(const Matrix& X, const std::vector<double>& grad, const std::vector<double>& hess,
                const std::vector<std::uint8_t>& row_in_sample,
                const std::vector<std::size_t>& feature_subset,
                const std::vector<std::vector<std::uint32_t>>& sorted_cols, int max_depth,
                double lambda, double gamma, double min_child_weight, int threads,
                std::vector<std::int32_t>* leaf_of_row, std::vector<double>* feature_gain) {
    const std::size_t n = X.rows;
    Tree tree;
    tree.nodes.push_back(TreeNode{});

    std::vector<std::int32_t> node_of_row(n, 0);

    struct NodeStats {
        double g = 0, h = 0;
        std::size_t count = 0;
    };
    std::vector<std::int32_t> active{0};
    NodeStats root;
    for (std::size_t r = 0; r < n; ++r) {
        if (!row_in_sample[r]) continue;
        root.g += grad[r];
        root.h += hess[r];
        ++root.count;
    }
    std::vector<NodeStats> stats_of{root};  // indexed by node id
    tree.nodes[0].weight = -root.g / (root.h + lambda);

    std::vector<std::int32_t> slot_of_node(1, 0);

    for (int depth = 0; depth < max_depth && !active.empty(); ++depth) {
        const std::size_t n_slots = active.size();

        // per-feature best candidates per slot, filled independently and
        // reduced in ascending feature order so thread count cannot change
        // the chosen splits
        std::vector<std::vector<SplitCandidate>> per_feature(feature_subset.size());
        parallel_for(feature_subset.size(), threads, [&](std::size_t fi) {
            const std::size_t j = feature_subset[fi];
            auto& best = per_feature[fi];
            best.assign(n_slots, SplitCandidate{});
            struct Scan {
                double gl = 0, hl = 0;
                double prev = 0;
                std::size_t seen = 0;
            };
            std::vector<Scan> scan(n_slots);
            for (std::uint32_t r : sorted_cols[j]) {
                if (!row_in_sample[r]) continue;
                std::int32_t nid = node_of_row[r];
                if (nid < 0) continue;
                std::int32_t slot = slot_of_node[static_cast<std::size_t>(nid)];
                if (slot < 0) continue;
                Scan& s = scan[static_cast<std::size_t>(slot)];
                double v = X.at(r, j);
                if (s.seen > 0 && v != s.prev) {
                    const NodeStats& node = stats_of[static_cast<std::size_t>(nid)];
                    double gr = node.g - s.gl, hr = node.h - s.hl;
                    if (s.hl >= min_child_weight && hr >= min_child_weight &&
                        s.seen < node.count) {
                        double gain = 0.5 * (leaf_objective(s.gl, s.hl, lambda) +
                                             leaf_objective(gr, hr, lambda) -
                                             leaf_objective(node.g, node.h, lambda)) -
                                      gamma;
                        SplitCandidate& b = best[static_cast<std::size_t>(slot)];
                        if (gain > 0.0 && (!b.valid || gain > b.gain)) {
                            b.gain = gain;
                            b.threshold = 0.5 * (s.prev + v);
                            b.gl = s.gl;
                            b.hl = s.hl;
                            b.valid = true;
                        }
                    }
                }
                s.gl += grad[r];
                s.hl += hess[r];
                s.prev = v;
                ++s.seen;
            }
        });

        struct Chosen {
            SplitCandidate cand;
            std::size_t feature = 0;
        };
        std::vector<Chosen> chosen(n_slots);
        for (std::size_t fi = 0; fi < feature_subset.size(); ++fi) {
            for (std::size_t s = 0; s < n_slots; ++s) {
                const SplitCandidate& c = per_feature[fi][s];
                if (!c.valid) continue;
                // strict improvement keeps the lowest feature index, and the
                // scan itself keeps the lowest threshold within a feature
                if (!chosen[s].cand.valid || c.gain > chosen[s].cand.gain) {
                    chosen[s].cand = c;
                    chosen[s].feature = feature_subset[fi];
                }
            }
        }

        // materialize accepted splits
        std::vector<std::int32_t> next_active;
        std::vector<std::int32_t> new_slot_of_node(tree.nodes.size() + 2 * n_slots, -1);
        bool any_split = false;
        for (std::size_t s = 0; s < n_slots; ++s) {
            if (!chosen[s].cand.valid) continue;
            any_split = true;
            std::int32_t nid = active[s];
            const NodeStats node = stats_of[static_cast<std::size_t>(nid)];  // by value: the
            const SplitCandidate c = chosen[s].cand;  // vectors grow below

            if (feature_gain) (*feature_gain)[chosen[s].feature] += c.gain;

            const std::int32_t left_id = static_cast<std::int32_t>(tree.nodes.size());
            const std::int32_t right_id = left_id + 1;
            {
                // reference must not outlive the push_backs below
                TreeNode& parent = tree.nodes[static_cast<std::size_t>(nid)];
                parent.feature = static_cast<std::int32_t>(chosen[s].feature);
                parent.threshold = c.threshold;
                parent.left = left_id;
                parent.right = right_id;
            }

            NodeStats left{c.gl, c.hl, 0}, right{node.g - c.gl, node.h - c.hl, 0};
            TreeNode lnode, rnode;
            lnode.weight = -left.g / (left.h + lambda);
            rnode.weight = -right.g / (right.h + lambda);
            tree.nodes.push_back(lnode);
            tree.nodes.push_back(rnode);
            stats_of.push_back(left);
            stats_of.push_back(right);

            if (depth + 1 < max_depth) {
                new_slot_of_node[static_cast<std::size_t>(left_id)] =
                    static_cast<std::int32_t>(next_active.size());
                next_active.push_back(left_id);
                new_slot_of_node[static_cast<std::size_t>(right_id)] =
                    static_cast<std::int32_t>(next_active.size());
                next_active.push_back(right_id);
            }
        }
        if (!any_split) break;

        new_slot_of_node.resize(tree.nodes.size(), -1);

        // route every row (sampled or not) through the new splits
        for (std::size_t r = 0; r < n; ++r) {
            std::int32_t nid = node_of_row[r];
            if (nid < 0) continue;
            const TreeNode& nd = tree.nodes[static_cast<std::size_t>(nid)];
            if (nd.feature < 0) continue;
            node_of_row[r] = X.at(r, static_cast<std::size_t>(nd.feature)) < nd.threshold
                                 ? nd.left
                                 : nd.right;
        }
        // recount children over sampled rows (counts only guard degenerate scans)
        for (std::size_t r = 0; r < n; ++r) {
            if (!row_in_sample[r]) continue;
            std::int32_t nid = node_of_row[r];
            if (nid >= 0) ++stats_of[static_cast<std::size_t>(nid)].count;
        }

        active = std::move(next_active);
        slot_of_node = std::move(new_slot_of_node);
    }

    if (leaf_of_row) {
        // rows may sit on internal ids when max_depth cut the loop early;
        // finish the routing
        for (std::size_t r = 0; r < n; ++r) {
            std::int32_t nid = node_of_row[r];
            while (tree.nodes[static_cast<std::size_t>(nid)].feature >= 0) {
                const TreeNode& nd = tree.nodes[static_cast<std::size_t>(nid)];
                nid = X.at(r, static_cast<std::size_t>(nd.feature)) < nd.threshold ? nd.left
                                                                                   : nd.right;
            }
            node_of_row[r] = nid;
        }
        *leaf_of_row = std::move(node_of_row);
    }
    return tree;
}

// ---------------------------------------------------------------------------

namespace {

void validate_gbm_config(const GbmConfig& c) {
    if (c.n_rounds < 1) throw validation_error("gbm: n_rounds must be >= 1");
    if (c.max_depth < 1) throw validation_error("gbm: max_depth must be >= 1");
    if (!(c.subsample > 0.0 && c.subsample <= 1.0))
        throw validation_error("gbm: subsample outside (0,1]");
    if (!(c.colsample > 0.0 && c.colsample <= 1.0))
        throw validation_error("gbm: colsample outside (0,1]");
    if (c.learning_rate <= 0.0) throw validation_error("gbm: learning_rate must be positive");
    if (c.lambda < 0.0 || c.gamma < 0.0)
        throw validation_error("gbm: lambda/gamma must be non-negative");
}

std::vector<std::size_t> sample_columns(std::size_t d, double colsample, Rng& rng) {
    if (colsample >= 1.0) {
        std::vector<std::size_t> all(d);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx);
    std::size_t keep = std::max<std::size_t>(1, static_cast<std::size_t>(colsample * static_cast<double>(d)));
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

GbmModel train_gbm(const Matrix& X, const std::vector<int>& y, const GbmConfig& config) {
    validate_gbm_config(config);
    if (X.rows == 0 || X.cols == 0) throw validation_error("gbm: empty training matrix");
    if (X.rows != y.size()) throw validation_error("gbm: rows and labels disagree");
    std::size_t positives = 0;
    for (int v : y) positives += static_cast<std::size_t>(v);
    if (positives == 0 || positives == y.size())
        throw validation_error("gbm: training labels are single-class");

    GbmModel model;
    model.config = config;
    model.learning_rate = config.learning_rate;
    model.n_features = X.cols;
    model.gain_importance.assign(X.cols, 0.0);
    double prevalence = std::clamp(static_cast<double>(positives) / static_cast<double>(y.size()),
                                   1e-6, 1.0 - 1e-6);
    model.base_score = std::log(prevalence / (1.0 - prevalence));

    auto sorted_cols = presort_columns(X, config.threads);

    std::vector<double> score(X.rows, model.base_score);
    std::vector<double> grad(X.rows), hess(X.rows);
    std::vector<std::uint8_t> in_sample(X.rows, 1);
    std::vector<std::size_t> row_idx(X.rows);
    std::iota(row_idx.begin(), row_idx.end(), std::size_t{0});

    Rng row_rng(config.seed, "subsample");
    Rng col_rng(config.seed, "colsample");

    for (int round = 0; round < config.n_rounds; ++round) {
        for (std::size_t r = 0; r < X.rows; ++r) {
            grad[r] = logistic_grad(y[r], score[r]);
            hess[r] = logistic_hess(y[r], score[r]);
        }
        if (config.subsample < 1.0) {
            std::fill(in_sample.begin(), in_sample.end(), 0);
            row_rng.shuffle(row_idx);
            std::size_t keep = std::max<std::size_t>(
                1, static_cast<std::size_t>(config.subsample * static_cast<double>(X.rows)));
            for (std::size_t i = 0; i < keep; ++i) in_sample[row_idx[i]] = 1;
        }
        auto cols = sample_columns(X.cols, config.colsample, col_rng);

        std::vector<std::int32_t> leaf_of_row;
        Tree tree = build_tree(X, grad, hess, in_sample, cols, sorted_cols, config.max_depth,
                               config.lambda, config.gamma, config.min_child_weight,
                               config.threads, &leaf_of_row, &model.gain_importance);

        for (std::size_t r = 0; r < X.rows; ++r)
            score[r] += config.learning_rate *
                        tree.nodes[static_cast<std::size_t>(leaf_of_row[r])].weight;

        double loss = 0.0;
        for (std::size_t r = 0; r < X.rows; ++r) loss += logistic_loss(y[r], score[r]);
        model.train_loss.push_back(loss / static_cast<double>(X.rows));

        model.trees.push_back(std::move(tree));
    }
    return model;
}

std::vector<double> GbmModel::predict_score(const Matrix& X) const {
    if (X.cols != n_features)
        throw validation_error("gbm predict: expected " + std::to_string(n_features) +
                               " features, got " + std::to_string(X.cols));
    std::vector<double> score(X.rows, base_score);
    for (const auto& tree : trees)
        for (std::size_t r = 0; r < X.rows; ++r)
            score[r] += learning_rate * tree.predict(X.row(r));
    return score;
}

std::vector<double> GbmModel::predict_proba(const Matrix& X) const {
    auto score = predict_score(X);
    for (double& s : score) s = sigmoid(s);
    return score;
}

std::vector<int> GbmModel::predict_label(const Matrix& X) const {
    auto proba = predict_proba(X);
    std::vector<int> labels(proba.size());
    for (std::size_t i = 0; i < proba.size(); ++i) labels[i] = proba[i] >= 0.5 ? 1 : 0;
    return labels;
}

void GbmModel::dump(std::ostream& out) const {
    json j;
    j["format"] = "ralpha-gbm";
    j["version"] = 1;
    j["base_score"] = base_score;
    j["learning_rate"] = learning_rate;
    j["n_features"] = n_features;
    json jtrees = json::array();
    for (const auto& tree : trees) {
        json jt = json::array();
        for (const auto& n : tree.nodes)
            jt.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right},
                          {"w", n.weight}});
        jtrees.push_back(std::move(jt));
    }
    j["trees"] = std::move(jtrees);
    out << j.dump();
}

GbmModel GbmModel::load(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw validation_error(std::string("gbm load: invalid JSON: ") + e.what());
    }
    if (j.value("format", "") != "ralpha-gbm" || j.value("version", 0) != 1)
        throw validation_error("gbm load: unknown model format");
    GbmModel model;
    model.base_score = j.at("base_score").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
    model.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& jt : j.at("trees")) {
        Tree tree;
        for (const auto& jn : jt) {
            TreeNode n;
            n.feature = jn.at("f").get<std::int32_t>();
            n.threshold = jn.at("t").get<double>();
            n.left = jn.at("l").get<std::int32_t>();
            n.right = jn.at("r").get<std::int32_t>();
            n.weight = jn.at("w").get<double>();
            tree.nodes.push_back(n);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

// ---------------------------------------------------------------------------

EvalMetrics evaluate(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw validation_error("evaluate: prediction/truth size mismatch or empty");
    EvalMetrics m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] == 1 && truth[i] == 1) ++m.tp;
        else if (predicted[i] == 1 && truth[i] == 0) ++m.fp;
        else if (predicted[i] == 0 && truth[i] == 0) ++m.tn;
        else ++m.fn;
    }
    m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.n());
    m.precision = (m.tp + m.fp) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp)
                                : undef();
    m.recall = (m.tp + m.fn) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn)
                             : undef();
    if (!is_undefined(m.precision) && !is_undefined(m.recall) && m.precision + m.recall > 0.0)
        m.f_measure = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else
        m.f_measure = undef();
    return m;
}

// ---------------------------------------------------------------------------
// baselines

std::vector<int> Classifier::predict_label(const Matrix& X) const {
    auto proba = predict_proba(X);
    std::vector<int> labels(proba.size());
    for (std::size_t i = 0; i < proba.size(); ++i) labels[i] = proba[i] >= 0.5 ? 1 : 0;
    return labels;
}

namespace {

class GbmClassifier : public Classifier {
public:
    explicit GbmClassifier(GbmModel model) : model_(std::move(model)) {}
    std::vector<double> predict_proba(const Matrix& X) const override {
        return model_.predict_proba(X);
    }
    const GbmModel& model() const { return model_; }

private:
    GbmModel model_;
};

class LogisticClassifier : public Classifier {
public:
    LogisticClassifier(const Matrix& X, const std::vector<int>& y, const LogisticConfig& cfg) {
        const std::size_t n = X.rows, d = X.cols;
        mean_.assign(d, 0.0);
        scale_.assign(d, 1.0);
        for (std::size_t j = 0; j < d; ++j) {
            double m = 0;
            for (std::size_t r = 0; r < n; ++r) m += X.at(r, j);
            m /= static_cast<double>(n);
            double v = 0;
            for (std::size_t r = 0; r < n; ++r) {
                double dlt = X.at(r, j) - m;
                v += dlt * dlt;
            }
            v /= static_cast<double>(n);
            mean_[j] = m;
            scale_[j] = v > 0 ? std::sqrt(v) : 1.0;
        }
        w_.assign(d, 0.0);
        b_ = 0.0;
        std::vector<double> z(d);
        for (int it = 0; it < cfg.iterations; ++it) {
            std::vector<double> gw(d, 0.0);
            double gb = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                double s = b_;
                for (std::size_t j = 0; j < d; ++j)
                    s += w_[j] * (X.at(r, j) - mean_[j]) / scale_[j];
                double err = sigmoid(s) - y[r];
                for (std::size_t j = 0; j < d; ++j)
                    gw[j] += err * (X.at(r, j) - mean_[j]) / scale_[j];
                gb += err;
            }
            for (std::size_t j = 0; j < d; ++j)
                w_[j] -= cfg.learning_rate * (gw[j] / static_cast<double>(n) + cfg.l2 * w_[j]);
            b_ -= cfg.learning_rate * gb / static_cast<double>(n);
        }
    }

    std::vector<double> predict_proba(const Matrix& X) const override {
        if (X.cols != w_.size()) throw validation_error("logistic predict: column mismatch");
        std::vector<double> p(X.rows);
        for (std::size_t r = 0; r < X.rows; ++r) {
            double s = b_;
            for (std::size_t j = 0; j < X.cols; ++j)
                s += w_[j] * (X.at(r, j) - mean_[j]) / scale_[j];
            p[r] = sigmoid(s);
        }
        return p;
    }

private:
    std::vector<double> w_, mean_, scale_;
    double b_ = 0.0;
};

class GaussianNbClassifier : public Classifier {
public:
    GaussianNbClassifier(const Matrix& X, const std::vector<int>& y, const GaussianNbConfig& cfg) {
        const std::size_t n = X.rows, d = X.cols;
        std::size_t n1 = 0;
        for (int v : y) n1 += static_cast<std::size_t>(v);
        if (n1 == 0 || n1 == n) throw validation_error("gaussian_nb: single-class labels");
        prior1_ = static_cast<double>(n1) / static_cast<double>(n);
        mean_[0].assign(d, 0.0);
        mean_[1].assign(d, 0.0);
        var_[0].assign(d, 0.0);
        var_[1].assign(d, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < d; ++j) mean_[y[r]][j] += X.at(r, j);
        for (std::size_t j = 0; j < d; ++j) {
            mean_[0][j] /= static_cast<double>(n - n1);
            mean_[1][j] /= static_cast<double>(n1);
        }
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < d; ++j) {
                double dv = X.at(r, j) - mean_[y[r]][j];
                var_[y[r]][j] += dv * dv;
            }
        double max_var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            var_[0][j] /= static_cast<double>(n - n1);
            var_[1][j] /= static_cast<double>(n1);
            max_var = std::max({max_var, var_[0][j], var_[1][j]});
        }
        double floor = cfg.variance_floor_ratio * max_var + 1e-12;
        for (int c = 0; c < 2; ++c)
            for (std::size_t j = 0; j < d; ++j) var_[c][j] = std::max(var_[c][j], floor);
    }

    std::vector<double> predict_proba(const Matrix& X) const override {
        if (X.cols != mean_[0].size()) throw validation_error("gaussian_nb predict: column mismatch");
        std::vector<double> p(X.rows);
        for (std::size_t r = 0; r < X.rows; ++r) {
            double log1 = std::log(prior1_), log0 = std::log(1.0 - prior1_);
            for (std::size_t j = 0; j < X.cols; ++j) {
                double x = X.at(r, j);
                double d1 = x - mean_[1][j], d0 = x - mean_[0][j];
                log1 += -0.5 * (std::log(2.0 * M_PI * var_[1][j]) + d1 * d1 / var_[1][j]);
                log0 += -0.5 * (std::log(2.0 * M_PI * var_[0][j]) + d0 * d0 / var_[0][j]);
            }
            double m = std::max(log1, log0);
            p[r] = std::exp(log1 - m) / (std::exp(log1 - m) + std::exp(log0 - m));
        }
        return p;
    }

private:
    double prior1_ = 0.5;
    std::vector<double> mean_[2], var_[2];
};

class RandomForestClassifier : public Classifier {
public:
    RandomForestClassifier(const Matrix& X, const std::vector<int>& y,
                           const RandomForestConfig& cfg, int threads) {
        const std::size_t n = X.rows, d = X.cols;
        std::size_t n1 = 0;
        for (int v : y) n1 += static_cast<std::size_t>(v);
        if (n1 == 0 || n1 == n) throw validation_error("random_forest: single-class labels");

        auto sorted_cols = presort_columns(X, threads);
        double colsample = cfg.colsample > 0.0
                               ? cfg.colsample
                               : std::sqrt(static_cast<double>(d)) / static_cast<double>(d);

        Rng rng(cfg.seed, "forest");
        trees_.reserve(static_cast<std::size_t>(cfg.n_trees));
        std::vector<double> grad(n), hess(n);
        std::vector<std::uint8_t> mask(n);
        for (int t = 0; t < cfg.n_trees; ++t) {
            // bootstrap multiplicities enter through the grad/hess weights;
            // with g = -w*y, h = w the leaf weight is the weighted label mean
            std::fill(grad.begin(), grad.end(), 0.0);
            std::fill(hess.begin(), hess.end(), 0.0);
            std::fill(mask.begin(), mask.end(), 0);
            for (std::size_t i = 0; i < n; ++i) {
                auto r = static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
                grad[r] -= y[r];
                hess[r] += 1.0;
                mask[r] = 1;
            }
            auto cols = sample_columns(d, colsample, rng);
            trees_.push_back(build_tree(X, grad, hess, mask, cols, sorted_cols, cfg.max_depth,
                                        1e-6, 0.0, 1.0, threads, nullptr));
        }
    }

    std::vector<double> predict_proba(const Matrix& X) const override {
        std::vector<double> p(X.rows, 0.0);
        for (const auto& tree : trees_)
            for (std::size_t r = 0; r < X.rows; ++r) p[r] += tree.predict(X.row(r));
        for (double& v : p) v = std::clamp(v / static_cast<double>(trees_.size()), 0.0, 1.0);
        return p;
    }

private:
    std::vector<Tree> trees_;
};

class MajorityClassifier : public Classifier {
public:
    MajorityClassifier(const std::vector<int>& y) {
        std::size_t n1 = 0;
        for (int v : y) n1 += static_cast<std::size_t>(v);
        // tie predicts the positive class
        label_ = 2 * n1 >= y.size() ? 1 : 0;
    }
    std::vector<double> predict_proba(const Matrix& X) const override {
        return std::vector<double>(X.rows, label_ == 1 ? 1.0 : 0.0);
    }

private:
    int label_ = 1;
};

}  // namespace

LearnerSpec learner_preset(const std::string& name) {
    LearnerSpec spec;
    spec.name = name;
    if (name == "xgb") {
        spec.kind = LearnerKind::Gbm;
    } else if (name == "gradient_boosting") {
        spec.kind = LearnerKind::Gbm;
        spec.gbm.lambda = 0.0;
        spec.gbm.max_depth = 3;
        spec.gbm.n_rounds = 100;
        spec.gbm.subsample = 1.0;
        spec.gbm.colsample = 1.0;
    } else if (name == "logistic") {
        spec.kind = LearnerKind::Logistic;
    } else if (name == "gaussian_nb") {
        spec.kind = LearnerKind::GaussianNb;
    } else if (name == "random_forest") {
        spec.kind = LearnerKind::RandomForest;
    } else if (name == "majority") {
        spec.kind = LearnerKind::Majority;
    } else {
        throw validation_error("unknown learner '" + name + "'");
    }
    return spec;
}

std::unique_ptr<Classifier> train_learner(const LearnerSpec& spec, const Matrix& X,
                                          const std::vector<int>& y, std::uint64_t seed,
                                          int threads) {
    switch (spec.kind) {
        case LearnerKind::Gbm: {
            GbmConfig cfg = spec.gbm;
            cfg.seed = seed;
            cfg.threads = threads;
            return std::make_unique<GbmClassifier>(train_gbm(X, y, cfg));
        }
        case LearnerKind::Logistic:
            return std::make_unique<LogisticClassifier>(X, y, spec.logistic);
        case LearnerKind::GaussianNb:
            return std::make_unique<GaussianNbClassifier>(X, y, spec.nb);
        case LearnerKind::RandomForest: {
            RandomForestConfig cfg = spec.forest;
            cfg.seed = seed;
            return std::make_unique<RandomForestClassifier>(X, y, cfg, threads);
        }
        case LearnerKind::Majority:
            return std::make_unique<MajorityClassifier>(y);
    }
    throw validation_error("bad learner kind");
}

// ---------------------------------------------------------------------------

std::vector<int> make_folds(std::size_t n, int k, const std::vector<int>& y, std::uint64_t seed,
                            bool stratify) {
    std::vector<int> fold(n, -1);
    Rng rng(seed, "fold-shuffle");
    if (!stratify) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        rng.shuffle(idx);
        for (std::size_t i = 0; i < n; ++i) fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        return fold;
    }
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if (y[i] == cls) idx.push_back(i);
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i)
            fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return fold;
}

CvResult kfold_cv(const Matrix& X, const std::vector<int>& y, int k, const LearnerSpec& learner,
                  std::uint64_t seed, int threads, bool stratify) {
    if (k < 2) throw validation_error("kfold_cv: k must be >= 2");
    if (X.rows < static_cast<std::size_t>(k))
        throw validation_error("kfold_cv: fewer rows than folds");

    auto fold = make_folds(X.rows, k, y, seed, stratify);
    CvResult result;
    EvalMetrics pooled;
    double acc_sum = 0.0;
    int valid = 0;

    for (int f = 0; f < k; ++f) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < X.rows; ++i)
            (fold[i] == f ? test_idx : train_idx).push_back(i);
        if (test_idx.empty()) continue;

        std::vector<int> ytr, yte;
        for (auto i : train_idx) ytr.push_back(y[i]);
        for (auto i : test_idx) yte.push_back(y[i]);

        FoldMetrics fm;
        fm.fold = f;
        bool has0 = false, has1 = false;
        for (int v : ytr) (v ? has1 : has0) = true;
        if (!has0 || !has1) {
            fm.degenerate = true;
            log_info("cv fold " + std::to_string(f) + " skipped: single-class training labels");
            result.folds.push_back(fm);
            ++result.degenerate_folds;
            continue;
        }

        Matrix Xtr = X.select_rows(train_idx), Xte = X.select_rows(test_idx);
        std::uint64_t fold_seed = seed ^ fnv1a64("cv-fold-" + std::to_string(f));
        auto model = train_learner(learner, Xtr, ytr, fold_seed, threads);
        fm.metrics = evaluate(model->predict_label(Xte), yte);
        result.folds.push_back(fm);

        pooled.tp += fm.metrics.tp;
        pooled.fp += fm.metrics.fp;
        pooled.tn += fm.metrics.tn;
        pooled.fn += fm.metrics.fn;
        acc_sum += fm.metrics.accuracy;
        ++valid;
    }
    if (valid == 0) throw validation_error("kfold_cv: all folds degenerate");

    result.mean_accuracy = acc_sum / valid;
    result.mean.tp = pooled.tp;
    result.mean.fp = pooled.fp;
    result.mean.tn = pooled.tn;
    result.mean.fn = pooled.fn;
    result.mean.accuracy =
        static_cast<double>(pooled.tp + pooled.tn) / static_cast<double>(pooled.n());
    result.mean.precision = (pooled.tp + pooled.fp)
                                ? static_cast<double>(pooled.tp) / static_cast<double>(pooled.tp + pooled.fp)
                                : undef();
    result.mean.recall = (pooled.tp + pooled.fn)
                             ? static_cast<double>(pooled.tp) / static_cast<double>(pooled.tp + pooled.fn)
                             : undef();
    if (!is_undefined(result.mean.precision) && !is_undefined(result.mean.recall) &&
        result.mean.precision + result.mean.recall > 0.0)
        result.mean.f_measure = 2.0 * result.mean.precision * result.mean.recall /
                                (result.mean.precision + result.mean.recall);
    else
        result.mean.f_measure = undef();
    return result;
}

}  // namespace ralpha
