#pragma once

// End-to-end experiment protocol: dataset assembly with leakage-guarded
// splits, the passing-rate feature-selection sweep, the classifier
// tournament, hold-out validation against the technical-indicator baseline,
// training-window and tau sweeps, and per-firm/sector reports.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ralpha/features.hpp"
#include "ralpha/gbm.hpp"
#include "ralpha/market.hpp"
#include "ralpha/stats.hpp"

namespace ralpha {

// Benchmark values from the original full-scale corpus. They are echoed in
// reports for context and never asserted: this tool's corpora cannot and do
// not reproduce them.
namespace reference {
constexpr double kCvAccuracyBoosted = 0.5965;
constexpr double kCvAccuracyRandom = 0.5677;
constexpr double kBorderlinePeakAccuracy = 0.5922;
constexpr double kBorderlinePeak = 0.20;
constexpr int kBorderlinePeakFeatureCount = 6246;
constexpr double kHoldoutAccuracyReviews = 0.6102;
constexpr double kHoldoutAccuracyIndicators = 0.4708;
constexpr double kHoldoutRandomValue = 0.5159;
constexpr double kHoldoutPrecisionReviews = 0.6605;
constexpr double kTauMinAccuracy = 0.5986;  // tau 0.020, n 14,506
constexpr double kTauMaxAccuracy = 0.6875;  // tau 0.086, n 9,070
}  // namespace reference

struct DatasetRow {
    std::string firm_id;
    std::int32_t week = 0;
    double rw = 0;
    int label = 0;
};

struct Dataset {
    Matrix X;
    std::vector<int> y;
    std::vector<DatasetRow> meta;
    std::vector<std::string> feature_names;

    std::size_t rows() const { return meta.size(); }
    double majority_share() const;
    double positive_share() const;
};

struct SplitSpec {
    Date train_start{}, train_end{}, test_start{}, test_end{};
    bool snooping_guard = true;
    int gap_weeks = 8;  // >= horizon when guard is on
    int horizon = 8;
    double cutoff = 0.0;
};

void validate_split(const SplitSpec& split);

struct DatasetPair {
    Dataset train, test;
};

// Inner-join of feature rows and labeled samples on (firm, week), date
// filtering per the split, undefined cells imputed to zero. With the guard
// on, training rows whose forward label window reaches into the test period
// are dropped (week + gap_weeks >= test start week).
DatasetPair assemble_dataset(const FeatureMatrix& features,
                             const std::vector<LabeledSample>& samples, const SplitSpec& split);

// Ten-indicator matrix over (firm, week) rows past the warm-up, for the
// price-only baseline.
FeatureMatrix indicator_matrix(const std::vector<WeeklySeries>& weekly, int period = 10);

// audit helper: true when every training row's label window ends before the
// test period starts
bool leakage_free(const Dataset& train, const SplitSpec& split);

// ---------------------------------------------------------------------------

struct BorderlinePoint {
    double borderline = 0;
    double accuracy = 0;       // mean CV accuracy
    std::size_t n_features = 0;
    bool defined = false;
};

struct BorderlineSweepResult {
    std::vector<BorderlinePoint> curve;
    double best_borderline = 0;  // argmax accuracy; ties keep the lowest borderline
    double best_accuracy = 0;
    std::vector<std::size_t> best_feature_set;
};

BorderlineSweepResult feature_selection_sweep(const Dataset& train, const SignificanceTable& table,
                                              int target_h, const std::vector<double>& grid,
                                              const LearnerSpec& learner, int k,
                                              std::uint64_t seed, int threads,
                                              bool stratify = false);

struct TournamentRow {
    std::string name;
    double mean_accuracy = 0;
    CvResult cv;
    bool failed = false;
    std::string error;
};

// Every learner sees identical folds (shared seed); rows sorted by mean
// accuracy, majority baseline always included as "Random".
std::vector<TournamentRow> classifier_tournament(const Dataset& train,
                                                 const std::vector<LearnerSpec>& roster, int k,
                                                 std::uint64_t seed, int threads,
                                                 bool stratify = false);

struct HoldoutResult {
    EvalMetrics metrics;
    double random_value = 0;    // test majority share
    double positive_share = 0;  // test positive-class share
    std::vector<int> predictions;
};

HoldoutResult holdout(const Dataset& train, const Dataset& test, const LearnerSpec& learner,
                      std::uint64_t seed, int threads);

struct WindowPoint {
    int window_weeks = 0;
    double accuracy = 0;
    double relative_accuracy = 0;  // accuracy minus test majority share
    std::size_t n_train = 0;
    bool defined = false;
};

struct WindowSweepResult {
    std::string period_name;  // e.g. "2017-07..2017-12"
    double random_value = 0;
    std::vector<WindowPoint> points;
};

// Trailing training windows of each length, anchored at the split's train
// end, evaluated on each test period.
std::vector<WindowSweepResult> window_sweep(const FeatureMatrix& features,
                                            const std::vector<LabeledSample>& samples,
                                            const SplitSpec& base,
                                            const std::vector<int>& lengths_weeks,
                                            const std::vector<std::pair<Date, Date>>& test_periods,
                                            const LearnerSpec& learner, std::uint64_t seed,
                                            int threads);

struct TauPoint {
    double tau = 0;
    double accuracy = 0;
    std::size_t n_train = 0, n_test = 0;
    bool defined = false;
};

// Relabels from raw returns on both sides of the split; a tau that empties a
// class leaves the point undefined.
std::vector<TauPoint> tau_sweep(const Dataset& train, const Dataset& test,
                                const LearnerSpec& learner, const std::vector<double>& taus,
                                std::uint64_t seed, int threads);

// ---------------------------------------------------------------------------
// per-firm / sector reporting

using SectorMap = std::map<std::string, std::string>;

SectorMap load_sectors_csv(std::istream& in);
SectorMap load_sectors_file(const std::string& path);

struct FirmAccuracy {
    std::string firm_id;
    std::string sector;
    double accuracy = 0;
    std::size_t n = 0;
    int rank = 0;  // 1 = best accuracy; ties break on firm_id
};

struct SectorRankSummary {
    std::string sector;
    int firms = 0;
    double min_rank = 0, q1 = 0, median = 0, q3 = 0, max_rank = 0;
};

struct UserLevelRow {
    std::string sector;
    double ordinary = 0, silver = 0, gold = 0, diamond = 0;
    std::size_t leveled_reviews = 0;
};

struct FirmSectorReport {
    std::vector<FirmAccuracy> firms;      // rank order
    std::vector<SectorRankSummary> sectors;
    std::vector<UserLevelRow> user_levels;
};

FirmSectorReport firm_sector_report(const Dataset& test, const std::vector<int>& predictions,
                                    const SectorMap& sectors,
                                    const std::vector<ReviewRecord>& reviews);

// ---------------------------------------------------------------------------
// full protocol

struct GridSpec {
    double start = 0, stop = 0, step = 1;
    std::vector<double> values() const;
};

struct ExperimentConfig {
    std::uint64_t seed = 42;
    int threads = 1;

    std::string reviews_path, prices_path, sectors_path;
    int min_reviews = 1000;
    int min_span_months = 12;
    MalformedPolicy on_malformed = MalformedPolicy::Skip;

    SplitSpec split;
    std::vector<std::pair<Date, Date>> extra_test_periods;

    double alpha = 0.05;
    int max_shift = 12;
    bool raw_t_threshold = false;
    int target_horizon = 8;

    GridSpec borderline_grid{0.0, 0.95, 0.05};
    GridSpec tau_grid{0.0, 0.1, 0.001};
    std::vector<int> window_lengths_weeks;  // default 26..260 step 26

    std::vector<std::string> roster;  // learner preset names
    std::string selection_learner = "gradient_boosting";
    std::string holdout_learner = "xgb";
    int cv_folds = 5;
    bool stratify_cv = false;
    GbmConfig gbm_overrides;  // applied to gbm-kind learners
    bool has_gbm_overrides = false;

    int indicator_period = 10;
    std::string out_dir = "out";
    bool stamp_manifest = false;  // wall-clock timestamps break byte-reproducibility

    static ExperimentConfig from_json_file(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);
};

struct RunManifest {
    std::string config_hash;  // fnv1a64 of the config file bytes
    std::uint64_t seed = 0;
    std::string tool_version;
    std::map<std::string, std::string> input_digests;
    std::string timestamp;  // empty unless stamping was requested

    std::string to_json() const;
};

extern const char* kToolVersion;

// Executes the whole protocol and writes all report files under
// config.out_dir. Returns the path of the summary file.
std::string run_experiment(const ExperimentConfig& config, const std::string& config_text);

// report writers (also used by the per-step CLI subcommands)
void write_borderline_csv(std::ostream& out, const BorderlineSweepResult& result);
void write_tournament_csv(std::ostream& out, const std::vector<TournamentRow>& rows);
void write_holdout_csv(std::ostream& out, const std::string& name, const HoldoutResult& result);
void write_window_sweep_csv(std::ostream& out, const std::vector<WindowSweepResult>& results);
void write_tau_sweep_csv(std::ostream& out, const std::vector<TauPoint>& points);
void write_firm_sector_csv(std::ostream& out, const FirmSectorReport& report);

}  // namespace ralpha
