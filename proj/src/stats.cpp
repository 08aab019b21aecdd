#include "ralpha/stats.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>

namespace ralpha {

std::vector<double> minmax_normalize(const std::vector<double>& series) {
    double lo = 0, hi = 0;
    bool seen = false;
    for (double v : series) {
        if (is_undefined(v)) continue;
        if (!seen) {
            lo = hi = v;
            seen = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!seen || lo == hi)
        throw validation_error("minmax_normalize: series has fewer than two distinct values");
    std::vector<double> out(series.size(), undef());
    for (std::size_t i = 0; i < series.size(); ++i)
        if (!is_undefined(series[i])) out[i] = (series[i] - lo) / (hi - lo);
    return out;
}

// ---------------------------------------------------------------------------
// incomplete beta (continued fraction, modified Lentz)

namespace {

double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16, kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                      b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double nu) {
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
}

std::optional<PearsonResult> pearson_or_null(std::span<const double> x,
                                             std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) return std::nullopt;
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;

    PearsonResult r;
    r.n_obs = n;
    r.rho = sxy / std::sqrt(sxx * syy);
    r.rho = std::clamp(r.rho, -1.0, 1.0);
    double nu = static_cast<double>(n) - 2.0;
    if (std::fabs(r.rho) >= 1.0) {
        // singular t statistic; limit behavior
        r.t_stat = r.rho > 0 ? INFINITY : -INFINITY;
        r.p = 0.0;
    } else {
        r.t_stat = r.rho * std::sqrt(nu) / std::sqrt(1.0 - r.rho * r.rho);
        r.p = student_t_two_sided_p(r.t_stat, nu);
    }
    return r;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw validation_error("pearson: series lengths differ");
    if (x.size() < 3)
        throw validation_error("pearson: need at least 3 observations, got " +
                               std::to_string(x.size()));
    auto r = pearson_or_null(x, y);
    if (!r) throw validation_error("pearson: constant input series");
    return *r;
}

// ---------------------------------------------------------------------------

double FirmTargets::value(std::int32_t week, int horizon) const {
    if (horizon < 1 || horizon > kNumTargets) throw validation_error("bad target horizon");
    std::int32_t off = week - first_week;
    if (off < 0 || off >= static_cast<std::int32_t>(rw.size())) return undef();
    return rw[static_cast<std::size_t>(off)][horizon - 1];
}

TargetPanel::TargetPanel(std::vector<FirmTargets> firms) : firms_(std::move(firms)) {
    std::sort(firms_.begin(), firms_.end(),
              [](const FirmTargets& a, const FirmTargets& b) { return a.firm_id < b.firm_id; });
}

const FirmTargets* TargetPanel::find(const std::string& firm_id) const {
    auto it = std::lower_bound(firms_.begin(), firms_.end(), firm_id,
                               [](const FirmTargets& f, const std::string& s) { return f.firm_id < s; });
    if (it == firms_.end() || it->firm_id != firm_id) return nullptr;
    return &*it;
}

TargetPanel build_target_panel(const std::vector<WeeklySeries>& weekly) {
    std::vector<FirmTargets> firms;
    for (const auto& series : weekly) {
        if (series.size() == 0) continue;
        FirmTargets ft;
        ft.firm_id = series.firm_id();
        ft.first_week = series.bars().front().week_index;
        std::int32_t last = series.bars().back().week_index;
        ft.rw.assign(static_cast<std::size_t>(last - ft.first_week) + 1, [] {
            std::array<double, kNumTargets> a;
            a.fill(undef());
            return a;
        }());
        for (int h = 1; h <= kNumTargets; ++h) {
            auto rws = weekly_returns(series, h);
            for (std::size_t i = 0; i < series.size(); ++i) {
                std::int32_t w = series.bars()[i].week_index;
                ft.rw[static_cast<std::size_t>(w - ft.first_week)][h - 1] = rws[i];
            }
        }
        firms.push_back(std::move(ft));
    }
    return TargetPanel(std::move(firms));
}

SignificanceTable::SignificanceTable(std::vector<std::string> feature_names,
                                     std::vector<std::string> firm_ids)
    : feature_names_(std::move(feature_names)), firm_ids_(std::move(firm_ids)) {
    bits_.assign(feature_names_.size() * kNumTargets * firm_ids_.size(), 0);
}

bool SignificanceTable::significant(std::size_t f, int target_h, std::size_t firm) const {
    return bits_[(f * kNumTargets + static_cast<std::size_t>(target_h - 1)) * firm_ids_.size() +
                 firm] != 0;
}

void SignificanceTable::set_significant(std::size_t f, int target_h, std::size_t firm) {
    bits_[(f * kNumTargets + static_cast<std::size_t>(target_h - 1)) * firm_ids_.size() + firm] = 1;
}

int SignificanceTable::count(std::size_t f, int target_h) const {
    int total = 0;
    for (std::size_t i = 0; i < num_firms(); ++i) total += significant(f, target_h, i) ? 1 : 0;
    return total;
}

double SignificanceTable::passing_rate(std::size_t f, int target_h) const {
    if (num_firms() == 0) return 0.0;
    return static_cast<double>(count(f, target_h)) / static_cast<double>(num_firms());
}

SignificanceTable significance_counts(const FeatureMatrix& features, const TargetPanel& targets,
                                      const SignificanceConfig& config) {
    if (config.max_shift < 1 || config.max_shift > 12)
        throw validation_error("max_shift outside [1,12]");

    // firms in feature-matrix row order
    std::vector<std::string> firm_ids;
    std::vector<std::pair<std::size_t, std::size_t>> firm_ranges;
    for (std::size_t r = 0; r < features.num_rows();) {
        const std::string& firm = features.rows()[r].first;
        auto range = features.firm_rows(firm);
        firm_ids.push_back(firm);
        firm_ranges.push_back(range);
        r = range.second;
    }

    SignificanceTable table(features.names(), firm_ids);
    std::mutex detail_mutex;

    parallel_for(features.num_cols(), config.threads, [&](std::size_t f) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < firm_ids.size(); ++i) {
            const FirmTargets* ft = targets.find(firm_ids[i]);
            if (!ft) continue;
            auto [lo, hi] = firm_ranges[i];
            std::int32_t first_week = features.rows()[lo].second;
            auto feature_at = [&](std::int32_t w) -> double {
                std::int32_t off = w - first_week;
                if (off < 0 || off >= static_cast<std::int32_t>(hi - lo)) return undef();
                return features.at(lo + static_cast<std::size_t>(off), f);
            };
            std::int32_t last_week = first_week + static_cast<std::int32_t>(hi - lo) - 1;

            for (int h = 1; h <= kNumTargets; ++h) {
                bool sig = false;
                for (int s = 1; s <= config.max_shift && !sig; ++s) {
                    xs.clear();
                    ys.clear();
                    for (std::int32_t w = first_week; w <= last_week + s; ++w) {
                        double fv = feature_at(w - s);
                        if (is_undefined(fv)) continue;
                        double tv = ft->value(w, h);
                        if (is_undefined(tv)) continue;
                        xs.push_back(fv);
                        ys.push_back(tv);
                    }
                    auto r = pearson_or_null(xs, ys);
                    if (!r) continue;
                    bool hit = config.raw_t_threshold ? (r->t_stat <= config.alpha)
                                                      : (r->p <= config.alpha);
                    if (hit) sig = true;
                    if (config.keep_detail) {
                        std::lock_guard<std::mutex> lock(detail_mutex);
                        table.detail.push_back({static_cast<std::uint32_t>(f), s, h,
                                                static_cast<std::uint32_t>(i), r->rho, r->p,
                                                static_cast<std::uint32_t>(r->n_obs)});
                    }
                }
                if (sig) table.set_significant(f, h, i);
            }
        }
    });

    if (config.keep_detail) {
        std::sort(table.detail.begin(), table.detail.end(), [](const auto& a, const auto& b) {
            return std::tie(a.feature, a.target_h, a.firm, a.shift) <
                   std::tie(b.feature, b.target_h, b.firm, b.shift);
        });
    }
    return table;
}

namespace {
double quantile_sorted(const std::vector<int>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return static_cast<double>(sorted[lo]) * (1.0 - frac) + static_cast<double>(sorted[hi]) * frac;
}
}  // namespace

TargetSelectionReport select_target(const SignificanceTable& table, int configured_h) {
    if (configured_h < 1 || configured_h > kNumTargets)
        throw validation_error("configured target outside [1,12]");
    TargetSelectionReport report;
    report.selected_h = configured_h;
    double best_median = -1.0;
    for (int h = 1; h <= kNumTargets; ++h) {
        std::vector<int> counts(table.num_features());
        int max_count = -1;
        std::size_t max_f = 0;
        for (std::size_t f = 0; f < table.num_features(); ++f) {
            counts[f] = table.count(f, h);
            if (counts[f] > max_count) {
                max_count = counts[f];
                max_f = f;
            }
        }
        std::sort(counts.begin(), counts.end());
        TargetQuantiles q;
        q.target_h = h;
        q.min = counts.empty() ? 0 : counts.front();
        q.q1 = quantile_sorted(counts, 0.25);
        q.median = quantile_sorted(counts, 0.5);
        q.q3 = quantile_sorted(counts, 0.75);
        q.max = counts.empty() ? 0 : counts.back();
        q.max_count = std::max(max_count, 0);
        q.max_feature = table.num_features() ? table.feature_names()[max_f] : "";
        if (q.median > best_median) {
            best_median = q.median;
            report.best_median_h = h;
        }
        report.per_target.push_back(std::move(q));
    }
    return report;
}

std::vector<std::size_t> passing_rate_filter(const SignificanceTable& table, int target_h,
                                             double borderline) {
    if (borderline < 0.0 || borderline > 0.95)
        throw validation_error("borderline outside [0, 0.95]");
    std::vector<std::size_t> kept;
    for (std::size_t f = 0; f < table.num_features(); ++f)
        if (table.passing_rate(f, target_h) >= borderline) kept.push_back(f);
    return kept;
}

void write_significance_csv(std::ostream& out, const SignificanceTable& table, int target_h) {
    out << "feature,target,count,passing_rate\n";
    for (std::size_t f = 0; f < table.num_features(); ++f) {
        out << table.feature_names()[f] << ",RW_" << target_h << ',' << table.count(f, target_h)
            << ',' << table.passing_rate(f, target_h) << '\n';
    }
}

void write_target_report_csv(std::ostream& out, const TargetSelectionReport& report) {
    out << "target,min,q1,median,q3,max,max_feature,max_count,selected\n";
    for (const auto& q : report.per_target) {
        out << "RW_" << q.target_h << ',' << q.min << ',' << q.q1 << ',' << q.median << ',' << q.q3
            << ',' << q.max << ',' << q.max_feature << ',' << q.max_count << ','
            << (q.target_h == report.selected_h ? 1 : 0) << '\n';
    }
}

}  // namespace ralpha
