#pragma once

// Min-max normalization, Pearson correlation with significance, the
// firm-counting machinery behind target selection, and passing-rate feature
// filtering.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ralpha/features.hpp"
#include "ralpha/market.hpp"

namespace ralpha {

// (x - min) / (max - min) over defined entries; undefined entries pass
// through. Throws validation_error when fewer than two distinct defined
// values exist (the correlation downstream is undefined anyway).
std::vector<double> minmax_normalize(const std::vector<double>& series);

struct PearsonResult {
    double rho = 0;     // sample correlation
    double t_stat = 0;  // rho * sqrt(n-2) / sqrt(1 - rho^2)
    double p = 1;       // two-sided p from the t distribution, n-2 dof
    std::size_t n_obs = 0;
};

// Throws validation_error on n < 3 or a constant side. |rho| = 1 clamps p
// to 0 (the t statistic is singular there).
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

// non-throwing variant used by the significance grid; nullopt on degeneracy
std::optional<PearsonResult> pearson_or_null(std::span<const double> x,
                                             std::span<const double> y);

// regularized incomplete beta I_x(a, b); exposed for tests
double incomplete_beta(double a, double b, double x);
// two-sided p for a t statistic with nu degrees of freedom
double student_t_two_sided_p(double t, double nu);

// ---------------------------------------------------------------------------

constexpr int kNumTargets = 12;  // RW_1 .. RW_12

// Forward h-week returns per firm, week-aligned with the feature panel.
struct FirmTargets {
    std::string firm_id;
    std::int32_t first_week = 0;
    // rw[week - first_week][h - 1]; undefined where no forward bar exists
    std::vector<std::array<double, kNumTargets>> rw;

    double value(std::int32_t week, int horizon) const;
};

class TargetPanel {
public:
    explicit TargetPanel(std::vector<FirmTargets> firms);
    const std::vector<FirmTargets>& firms() const { return firms_; }
    const FirmTargets* find(const std::string& firm_id) const;

private:
    std::vector<FirmTargets> firms_;  // sorted by firm_id
};

TargetPanel build_target_panel(const std::vector<WeeklySeries>& weekly);

struct SignificanceConfig {
    int max_shift = 12;        // shifts 1..max_shift
    double alpha = 0.05;
    bool raw_t_threshold = false;  // apply alpha to the raw t statistic as printed,
                                   // instead of to the proper p-value
    bool keep_detail = false;      // record every (f,s,t,i) correlation; tests only
    int threads = 1;
};

class SignificanceTable {
public:
    SignificanceTable(std::vector<std::string> feature_names, std::vector<std::string> firm_ids);

    std::size_t num_features() const { return feature_names_.size(); }
    std::size_t num_firms() const { return firm_ids_.size(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<std::string>& firm_ids() const { return firm_ids_; }

    // Significance_{fti}: 1 iff some shift s has p <= alpha for firm i
    bool significant(std::size_t f, int target_h, std::size_t firm) const;
    void set_significant(std::size_t f, int target_h, std::size_t firm);

    int count(std::size_t f, int target_h) const;        // Count_{ft} over firms
    double passing_rate(std::size_t f, int target_h) const;  // Count / I

    struct Detail {
        std::uint32_t feature = 0;
        int shift = 0;
        int target_h = 0;
        std::uint32_t firm = 0;
        double rho = 0, p = 0;
        std::uint32_t n_obs = 0;
    };
    std::vector<Detail> detail;  // populated only with keep_detail

private:
    std::vector<std::string> feature_names_;
    std::vector<std::string> firm_ids_;
    std::vector<std::uint8_t> bits_;  // [f][t][i]
};

// The full (feature x shift x target x firm) grid. Degenerate or too-short
// series count as not significant. Correlations are computed on the raw
// defined pairs; min-max normalization cannot change |rho| or p, which the
// property tests assert explicitly.
SignificanceTable significance_counts(const FeatureMatrix& features, const TargetPanel& targets,
                                      const SignificanceConfig& config);

struct TargetQuantiles {
    int target_h = 0;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    std::string max_feature;  // exemplar with the largest count
    int max_count = 0;
};

struct TargetSelectionReport {
    std::vector<TargetQuantiles> per_target;  // h = 1..12
    int selected_h = 8;                       // configured choice
    int best_median_h = 0;                    // argmax of median count, for audit
};

TargetSelectionReport select_target(const SignificanceTable& table, int configured_h = 8);

// Features with PassingRate >= borderline for the given target (inclusive).
std::vector<std::size_t> passing_rate_filter(const SignificanceTable& table, int target_h,
                                             double borderline);

void write_significance_csv(std::ostream& out, const SignificanceTable& table, int target_h);
void write_target_report_csv(std::ostream& out, const TargetSelectionReport& report);

}  // namespace ralpha
