#include "ralpha/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ralpha/ingest.hpp"
#include "ralpha/panel.hpp"
#include "ralpha/synth.hpp"

namespace ralpha {

using nlohmann::json;

const char* kToolVersion = "0.1.0";

double Dataset::majority_share() const {
    if (meta.empty()) return 0.0;
    std::size_t pos = 0;
    for (int v : y) pos += static_cast<std::size_t>(v);
    std::size_t maj = std::max(pos, meta.size() - pos);
    return static_cast<double>(maj) / static_cast<double>(meta.size());
}

double Dataset::positive_share() const {
    if (meta.empty()) return 0.0;
    std::size_t pos = 0;
    for (int v : y) pos += static_cast<std::size_t>(v);
    return static_cast<double>(pos) / static_cast<double>(meta.size());
}

void validate_split(const SplitSpec& split) {
    if (!(split.train_start <= split.train_end))
        throw validation_error("split: train_start after train_end");
    if (!(split.test_start <= split.test_end))
        throw validation_error("split: test_start after test_end");
    if (!(split.train_end < split.test_start))
        throw validation_error("split: training period must precede the test period");
    if (split.horizon < 1 || split.horizon > 12)
        throw validation_error("split: horizon outside [1,12]");
    if (split.snooping_guard && split.gap_weeks < split.horizon)
        throw validation_error("split: snooping gap shorter than the label horizon");
}

namespace {

// a week belongs to a period iff its Monday lies inside [start, end]; a week
// can never straddle two periods
std::int32_t first_week_on_or_after(Date start) {
    std::int32_t w = week_index_of(start);
    return week_monday(w) >= start ? w : w + 1;
}

std::int32_t last_week_on_or_before(Date end) { return week_index_of(end); }

Dataset make_dataset(const FeatureMatrix& features, const std::vector<LabeledSample>& samples,
                     std::int32_t week_lo, std::int32_t week_hi, double cutoff,
                     std::optional<std::int32_t> guard_before) {
    std::map<std::pair<std::string, std::int32_t>, double> rw_by_key;
    for (const auto& s : samples) rw_by_key[{s.firm_id, s.week_index}] = s.rw;

    std::vector<std::size_t> row_ids;
    std::vector<double> rws;
    for (std::size_t r = 0; r < features.num_rows(); ++r) {
        const auto& [firm, week] = features.rows()[r];
        if (week < week_lo || week > week_hi) continue;
        if (guard_before && week >= *guard_before) continue;
        auto it = rw_by_key.find({firm, week});
        if (it == rw_by_key.end()) continue;
        row_ids.push_back(r);
        rws.push_back(it->second);
    }

    Dataset ds;
    ds.feature_names = features.names();
    ds.X = Matrix(row_ids.size(), features.num_cols());
    ds.y.resize(row_ids.size());
    ds.meta.resize(row_ids.size());
    for (std::size_t i = 0; i < row_ids.size(); ++i) {
        std::size_t r = row_ids[i];
        const auto& [firm, week] = features.rows()[r];
        for (std::size_t c = 0; c < features.num_cols(); ++c) {
            double v = features.at(r, c);
            ds.X.at(i, c) = is_undefined(v) ? 0.0 : v;  // imputation happens here only
        }
        ds.y[i] = label(rws[i], cutoff);
        ds.meta[i] = {firm, week, rws[i], ds.y[i]};
    }
    return ds;
}

Dataset restrict_columns(const Dataset& ds, const std::vector<std::size_t>& cols) {
    Dataset out;
    out.X = ds.X.select_cols(cols);
    out.y = ds.y;
    out.meta = ds.meta;
    out.feature_names.reserve(cols.size());
    for (auto c : cols) out.feature_names.push_back(ds.feature_names[c]);
    return out;
}

Dataset restrict_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.X = ds.X.select_rows(rows);
    out.feature_names = ds.feature_names;
    out.y.reserve(rows.size());
    out.meta.reserve(rows.size());
    for (auto r : rows) {
        out.y.push_back(ds.y[r]);
        out.meta.push_back(ds.meta[r]);
    }
    return out;
}

}  // namespace

DatasetPair assemble_dataset(const FeatureMatrix& features,
                             const std::vector<LabeledSample>& samples, const SplitSpec& split) {
    validate_split(split);
    std::int32_t test_start_week = first_week_on_or_after(split.test_start);
    std::optional<std::int32_t> guard;
    if (split.snooping_guard) guard = test_start_week - split.gap_weeks;

    DatasetPair pair;
    pair.train = make_dataset(features, samples, first_week_on_or_after(split.train_start),
                              last_week_on_or_before(split.train_end), split.cutoff, guard);
    pair.test = make_dataset(features, samples, test_start_week,
                             last_week_on_or_before(split.test_end), split.cutoff, std::nullopt);
    if (pair.train.rows() == 0)
        throw validation_error("assemble_dataset: empty training set after filtering");
    if (pair.test.rows() == 0)
        throw validation_error("assemble_dataset: empty test set after filtering");
    return pair;
}

bool leakage_free(const Dataset& train, const SplitSpec& split) {
    std::int32_t test_start_week = first_week_on_or_after(split.test_start);
    std::int32_t train_end_week = last_week_on_or_before(split.train_end);
    for (const auto& row : train.meta) {
        if (row.week > train_end_week) return false;
        if (split.snooping_guard && row.week + split.gap_weeks >= test_start_week) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

BorderlineSweepResult feature_selection_sweep(const Dataset& train, const SignificanceTable& table,
                                              int target_h, const std::vector<double>& grid,
                                              const LearnerSpec& learner, int k,
                                              std::uint64_t seed, int threads, bool stratify) {
    if (grid.empty()) throw validation_error("feature_selection_sweep: empty grid");
    if (table.num_features() != train.X.cols)
        throw validation_error("feature_selection_sweep: table does not match dataset columns");

    BorderlineSweepResult result;
    bool any = false;
    for (double b : grid) {
        BorderlinePoint point;
        point.borderline = b;
        auto kept = passing_rate_filter(table, target_h, b);
        point.n_features = kept.size();
        if (!kept.empty()) {
            Dataset sub = restrict_columns(train, kept);
            try {
                CvResult cv = kfold_cv(sub.X, sub.y, k, learner, seed, threads, stratify);
                point.accuracy = cv.mean_accuracy;
                point.defined = true;
            } catch (const validation_error& e) {
                log_info("borderline " + std::to_string(b) + " undefined: " + e.what());
            }
        }
        if (point.defined && (!any || point.accuracy > result.best_accuracy)) {
            any = true;
            result.best_accuracy = point.accuracy;
            result.best_borderline = b;
            result.best_feature_set = kept;
        }
        result.curve.push_back(std::move(point));
    }
    if (!any) throw validation_error("feature_selection_sweep: every grid point undefined");
    return result;
}

std::vector<TournamentRow> classifier_tournament(const Dataset& train,
                                                 const std::vector<LearnerSpec>& roster, int k,
                                                 std::uint64_t seed, int threads, bool stratify) {
    if (roster.empty()) throw validation_error("tournament: empty roster");
    std::vector<TournamentRow> rows;
    bool has_majority = false;
    for (const auto& spec : roster) {
        if (spec.kind == LearnerKind::Majority) has_majority = true;
        TournamentRow row;
        row.name = spec.name;
        try {
            row.cv = kfold_cv(train.X, train.y, k, spec, seed, threads, stratify);
            row.mean_accuracy = row.cv.mean_accuracy;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    if (!has_majority) {
        TournamentRow row;
        row.name = "Random";
        LearnerSpec majority = learner_preset("majority");
        try {
            row.cv = kfold_cv(train.X, train.y, k, majority, seed, threads, stratify);
            row.mean_accuracy = row.cv.mean_accuracy;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const TournamentRow& a, const TournamentRow& b) {
        if (a.failed != b.failed) return !a.failed;
        return a.mean_accuracy > b.mean_accuracy;
    });
    return rows;
}

HoldoutResult holdout(const Dataset& train, const Dataset& test, const LearnerSpec& learner,
                      std::uint64_t seed, int threads) {
    if (train.rows() == 0 || test.rows() == 0)
        throw validation_error("holdout: empty train or test set");
    auto model = train_learner(learner, train.X, train.y, seed, threads);
    HoldoutResult result;
    result.predictions = model->predict_label(test.X);
    result.metrics = evaluate(result.predictions, test.y);
    result.random_value = test.majority_share();
    result.positive_share = test.positive_share();
    return result;
}

std::vector<WindowSweepResult> window_sweep(const FeatureMatrix& features,
                                            const std::vector<LabeledSample>& samples,
                                            const SplitSpec& base,
                                            const std::vector<int>& lengths_weeks,
                                            const std::vector<std::pair<Date, Date>>& test_periods,
                                            const LearnerSpec& learner, std::uint64_t seed,
                                            int threads) {
    std::vector<WindowSweepResult> results;
    for (const auto& [test_start, test_end] : test_periods) {
        WindowSweepResult r;
        r.period_name = format_date(test_start) + ".." + format_date(test_end);

        SplitSpec split = base;
        split.test_start = test_start;
        split.test_end = test_end;
        split.train_end = Date{test_start.days - 1};

        for (int length : lengths_weeks) {
            split.train_start = Date{split.train_end.days - 7 * length + 1};
            WindowPoint point;
            point.window_weeks = length;
            try {
                DatasetPair pair = assemble_dataset(features, samples, split);
                r.random_value = pair.test.majority_share();
                HoldoutResult h = holdout(pair.train, pair.test, learner, seed, threads);
                point.accuracy = h.metrics.accuracy;
                point.relative_accuracy = h.metrics.accuracy - h.random_value;
                point.n_train = pair.train.rows();
                point.defined = true;
            } catch (const validation_error& e) {
                log_info("window " + std::to_string(length) + "w undefined: " + e.what());
            }
            r.points.push_back(point);
        }
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<TauPoint> tau_sweep(const Dataset& train, const Dataset& test,
                                const LearnerSpec& learner, const std::vector<double>& taus,
                                std::uint64_t seed, int threads) {
    std::vector<TauPoint> points;
    for (double tau : taus) {
        if (tau < 0.0 || tau > 0.1) throw validation_error("tau sweep: tau outside [0, 0.1]");
        TauPoint point;
        point.tau = tau;

        // relabel from raw returns, strict on both sides
        auto filter = [tau](const Dataset& ds, std::vector<std::size_t>& rows,
                            std::vector<int>& labels) {
            for (std::size_t i = 0; i < ds.rows(); ++i) {
                if (ds.meta[i].rw > tau) {
                    rows.push_back(i);
                    labels.push_back(1);
                } else if (ds.meta[i].rw < -tau) {
                    rows.push_back(i);
                    labels.push_back(0);
                }
            }
        };
        std::vector<std::size_t> train_rows, test_rows;
        std::vector<int> train_y, test_y;
        filter(train, train_rows, train_y);
        filter(test, test_rows, test_y);
        point.n_train = train_rows.size();
        point.n_test = test_rows.size();

        bool train_ok = false, test_ok = false;
        if (!train_y.empty()) {
            bool h0 = false, h1 = false;
            for (int v : train_y) (v ? h1 : h0) = true;
            train_ok = h0 && h1;
        }
        test_ok = !test_y.empty();
        if (train_ok && test_ok) {
            Dataset tr = restrict_rows(train, train_rows);
            tr.y = train_y;
            Dataset te = restrict_rows(test, test_rows);
            te.y = test_y;
            try {
                auto model = train_learner(learner, tr.X, tr.y, seed, threads);
                point.accuracy = evaluate(model->predict_label(te.X), te.y).accuracy;
                point.defined = true;
            } catch (const validation_error& e) {
                log_info("tau " + std::to_string(tau) + " undefined: " + e.what());
            }
        }
        points.push_back(point);
    }
    return points;
}

// ---------------------------------------------------------------------------

SectorMap load_sectors_csv(std::istream& in) {
    SectorMap map;
    std::string line;
    if (!std::getline(in, line)) throw validation_error("sectors: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "firm_id,sector")
        throw validation_error("sectors: unexpected header '" + line + "'");
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw validation_error("sectors: bad line '" + line + "'");
        map[line.substr(0, comma)] = line.substr(comma + 1);
    }
    return map;
}

SectorMap load_sectors_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open sectors file: " + path);
    return load_sectors_csv(in);
}

namespace {
double rank_quantile(const std::vector<int>& sorted_ranks, double q) {
    if (sorted_ranks.empty()) return 0.0;
    double pos = q * static_cast<double>(sorted_ranks.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted_ranks.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted_ranks[lo] * (1.0 - frac) + sorted_ranks[hi] * frac;
}
}  // namespace

FirmSectorReport firm_sector_report(const Dataset& test, const std::vector<int>& predictions,
                                    const SectorMap& sectors,
                                    const std::vector<ReviewRecord>& reviews) {
    if (predictions.size() != test.rows())
        throw validation_error("firm_sector_report: prediction count mismatch");

    std::map<std::string, std::pair<std::size_t, std::size_t>> correct_of;  // firm -> (hits, n)
    for (std::size_t i = 0; i < test.rows(); ++i) {
        auto& [hits, n] = correct_of[test.meta[i].firm_id];
        hits += predictions[i] == test.y[i] ? 1 : 0;
        ++n;
    }

    FirmSectorReport report;
    for (const auto& [firm, stat] : correct_of) {
        auto it = sectors.find(firm);
        if (it == sectors.end())
            throw validation_error("firm_sector_report: firm " + firm + " missing from sector map");
        FirmAccuracy fa;
        fa.firm_id = firm;
        fa.sector = it->second;
        fa.n = stat.second;
        fa.accuracy = static_cast<double>(stat.first) / static_cast<double>(stat.second);
        report.firms.push_back(std::move(fa));
    }
    std::sort(report.firms.begin(), report.firms.end(),
              [](const FirmAccuracy& a, const FirmAccuracy& b) {
                  if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
                  return a.firm_id < b.firm_id;
              });
    for (std::size_t i = 0; i < report.firms.size(); ++i)
        report.firms[i].rank = static_cast<int>(i) + 1;

    std::map<std::string, std::vector<int>> ranks_by_sector;
    for (const auto& fa : report.firms) ranks_by_sector[fa.sector].push_back(fa.rank);
    for (auto& [sector, ranks] : ranks_by_sector) {
        std::sort(ranks.begin(), ranks.end());
        SectorRankSummary s;
        s.sector = sector;
        s.firms = static_cast<int>(ranks.size());
        s.min_rank = ranks.front();
        s.q1 = rank_quantile(ranks, 0.25);
        s.median = rank_quantile(ranks, 0.5);
        s.q3 = rank_quantile(ranks, 0.75);
        s.max_rank = ranks.back();
        report.sectors.push_back(std::move(s));
    }

    std::map<std::string, std::array<std::size_t, 4>> level_counts;
    for (const auto& r : reviews) {
        if (!r.user_level) continue;
        auto it = sectors.find(r.firm_id);
        if (it == sectors.end()) continue;
        level_counts[it->second][static_cast<std::size_t>(*r.user_level)] += 1;
    }
    for (const auto& [sector, counts] : level_counts) {
        UserLevelRow row;
        row.sector = sector;
        row.leveled_reviews = counts[0] + counts[1] + counts[2] + counts[3];
        if (row.leveled_reviews > 0) {
            double total = static_cast<double>(row.leveled_reviews);
            row.ordinary = counts[0] / total;
            row.silver = counts[1] / total;
            row.gold = counts[2] / total;
            row.diamond = counts[3] / total;
        }
        report.user_levels.push_back(std::move(row));
    }
    return report;
}

// ---------------------------------------------------------------------------
// config

std::vector<double> GridSpec::values() const {
    if (step <= 0) throw validation_error("grid: step must be positive");
    std::vector<double> out;
    for (int i = 0;; ++i) {
        double v = start + step * i;
        if (v > stop + 1e-12) break;
        out.push_back(std::min(v, stop));
    }
    if (out.empty()) throw validation_error("grid: empty");
    return out;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig c;
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.reviews_path = j.value("reviews", "");
    c.prices_path = j.value("prices", "");
    c.sectors_path = j.value("sectors", "");
    c.min_reviews = j.value("min_reviews", c.min_reviews);
    c.min_span_months = j.value("min_span_months", c.min_span_months);
    if (j.value("on_malformed", "skip") == "fail") c.on_malformed = MalformedPolicy::Fail;

    c.split.train_start = parse_date(j.value("train_start", "2014-01-01"));
    c.split.train_end = parse_date(j.value("train_end", "2017-06-30"));
    c.split.test_start = parse_date(j.value("test_start", "2017-07-01"));
    c.split.test_end = parse_date(j.value("test_end", "2017-12-31"));
    c.split.snooping_guard = j.value("snooping_guard", true);
    c.split.horizon = j.value("horizon", 8);
    c.split.gap_weeks = j.value("gap_weeks", c.split.horizon);
    c.split.cutoff = j.value("cutoff", 0.0);

    if (j.contains("extra_test_periods")) {
        for (const auto& p : j["extra_test_periods"])
            c.extra_test_periods.emplace_back(parse_date(p.at("start").get<std::string>()),
                                              parse_date(p.at("end").get<std::string>()));
    }

    c.alpha = j.value("alpha", c.alpha);
    c.max_shift = j.value("max_shift", c.max_shift);
    c.raw_t_threshold = j.value("raw_t_threshold", false);
    c.target_horizon = j.value("target_horizon", 8);

    auto read_grid = [&](const char* key, GridSpec& g) {
        if (!j.contains(key)) return;
        const auto& jg = j[key];
        g.start = jg.value("start", g.start);
        g.stop = jg.value("stop", g.stop);
        g.step = jg.value("step", g.step);
    };
    read_grid("borderline_grid", c.borderline_grid);
    read_grid("tau_grid", c.tau_grid);

    if (j.contains("window_lengths_weeks"))
        c.window_lengths_weeks = j["window_lengths_weeks"].get<std::vector<int>>();
    else
        for (int w = 26; w <= 260; w += 26) c.window_lengths_weeks.push_back(w);

    if (j.contains("learners"))
        c.roster = j["learners"].get<std::vector<std::string>>();
    else
        c.roster = {"xgb", "gradient_boosting", "logistic", "random_forest", "gaussian_nb"};
    c.selection_learner = j.value("selection_learner", c.selection_learner);
    c.holdout_learner = j.value("holdout_learner", c.holdout_learner);
    c.cv_folds = j.value("cv_folds", 5);
    c.stratify_cv = j.value("stratify_cv", false);

    if (j.contains("gbm")) {
        const auto& g = j["gbm"];
        c.gbm_overrides.n_rounds = g.value("n_rounds", c.gbm_overrides.n_rounds);
        c.gbm_overrides.max_depth = g.value("max_depth", c.gbm_overrides.max_depth);
        c.gbm_overrides.learning_rate = g.value("learning_rate", c.gbm_overrides.learning_rate);
        c.gbm_overrides.min_child_weight =
            g.value("min_child_weight", c.gbm_overrides.min_child_weight);
        c.gbm_overrides.lambda = g.value("lambda", c.gbm_overrides.lambda);
        c.gbm_overrides.gamma = g.value("gamma", c.gbm_overrides.gamma);
        c.gbm_overrides.subsample = g.value("subsample", c.gbm_overrides.subsample);
        c.gbm_overrides.colsample = g.value("colsample", c.gbm_overrides.colsample);
        c.has_gbm_overrides = true;
    }

    c.indicator_period = j.value("indicator_period", 10);
    c.out_dir = j.value("out_dir", "out");
    c.stamp_manifest = j.value("stamp_manifest", false);

    if (c.reviews_path.empty() || c.prices_path.empty())
        throw validation_error("config: 'reviews' and 'prices' paths are required");
    validate_split(c.split);
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string RunManifest::to_json() const {
    json j;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["tool_version"] = tool_version;
    json digests;
    for (const auto& [name, digest] : input_digests) digests[name] = digest;
    j["input_digests"] = std::move(digests);
    if (!timestamp.empty()) j["timestamp"] = timestamp;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// report writers

namespace {
std::string fmt(double v, const char* spec = "%.10g") {
    if (is_undefined(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}
}  // namespace

void write_borderline_csv(std::ostream& out, const BorderlineSweepResult& result) {
    out << "borderline,n_features,cv_accuracy,defined,best\n";
    for (const auto& p : result.curve) {
        out << fmt(p.borderline, "%.2f") << ',' << p.n_features << ','
            << (p.defined ? fmt(p.accuracy) : "") << ',' << (p.defined ? 1 : 0) << ','
            << (p.defined && p.borderline == result.best_borderline ? 1 : 0) << '\n';
    }
}

void write_tournament_csv(std::ostream& out, const std::vector<TournamentRow>& rows) {
    out << "model,mean_cv_accuracy,pooled_precision,pooled_recall,pooled_f_measure,degenerate_folds,failed\n";
    for (const auto& r : rows) {
        out << r.name << ',';
        if (r.failed) {
            out << ",,,,," << 1 << '\n';
            continue;
        }
        out << fmt(r.mean_accuracy) << ',' << fmt(r.cv.mean.precision) << ','
            << fmt(r.cv.mean.recall) << ',' << fmt(r.cv.mean.f_measure) << ','
            << r.cv.degenerate_folds << ",0\n";
    }
}

void write_holdout_csv(std::ostream& out, const std::string& name, const HoldoutResult& result) {
    out << "model,accuracy,precision,recall,f_measure,random_value,positive_share,n_test\n";
    out << name << ',' << fmt(result.metrics.accuracy) << ',' << fmt(result.metrics.precision)
        << ',' << fmt(result.metrics.recall) << ',' << fmt(result.metrics.f_measure) << ','
        << fmt(result.random_value) << ',' << fmt(result.positive_share) << ','
        << result.metrics.n() << '\n';
}

void write_window_sweep_csv(std::ostream& out, const std::vector<WindowSweepResult>& results) {
    out << "test_period,window_weeks,accuracy,relative_accuracy,n_train,defined\n";
    for (const auto& r : results)
        for (const auto& p : r.points)
            out << r.period_name << ',' << p.window_weeks << ','
                << (p.defined ? fmt(p.accuracy) : "") << ','
                << (p.defined ? fmt(p.relative_accuracy) : "") << ',' << p.n_train << ','
                << (p.defined ? 1 : 0) << '\n';
}

void write_tau_sweep_csv(std::ostream& out, const std::vector<TauPoint>& points) {
    out << "tau,accuracy,n_train,n_test,defined\n";
    for (const auto& p : points)
        out << fmt(p.tau, "%.3f") << ',' << (p.defined ? fmt(p.accuracy) : "") << ',' << p.n_train
            << ',' << p.n_test << ',' << (p.defined ? 1 : 0) << '\n';
}

void write_firm_sector_csv(std::ostream& out, const FirmSectorReport& report) {
    out << "firm_id,sector,accuracy,n_test,rank\n";
    for (const auto& f : report.firms)
        out << f.firm_id << ',' << f.sector << ',' << fmt(f.accuracy) << ',' << f.n << ','
            << f.rank << '\n';
    out << "\nsector,firms,min_rank,q1,median,q3,max_rank\n";
    for (const auto& s : report.sectors)
        out << s.sector << ',' << s.firms << ',' << fmt(s.min_rank) << ',' << fmt(s.q1) << ','
            << fmt(s.median) << ',' << fmt(s.q3) << ',' << fmt(s.max_rank) << '\n';
    out << "\nsector,ordinary,silver,gold,diamond,leveled_reviews\n";
    for (const auto& u : report.user_levels)
        out << u.sector << ',' << fmt(u.ordinary) << ',' << fmt(u.silver) << ',' << fmt(u.gold)
            << ',' << fmt(u.diamond) << ',' << u.leveled_reviews << '\n';
}

// ---------------------------------------------------------------------------
// full protocol

namespace {

LearnerSpec resolve_learner(const ExperimentConfig& config, const std::string& name) {
    LearnerSpec spec = learner_preset(name);
    if (config.has_gbm_overrides && spec.kind == LearnerKind::Gbm && name == "xgb")
        spec.gbm = config.gbm_overrides;
    return spec;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open input for digest: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return hex64(fnv1a64(bytes));
}

}  // namespace

FeatureMatrix indicator_matrix(const std::vector<WeeklySeries>& weekly, int period) {
    std::vector<std::string> names(IndicatorVector::names().begin(),
                                   IndicatorVector::names().end());
    std::vector<std::pair<std::string, std::int32_t>> rows;
    std::vector<IndicatorVector> vectors;
    std::vector<const WeeklySeries*> sorted;
    for (const auto& s : weekly) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(), [](const WeeklySeries* a, const WeeklySeries* b) {
        return a->firm_id() < b->firm_id();
    });
    for (const WeeklySeries* series : sorted) {
        for (std::size_t t = 0; t < series->size(); ++t) {
            IndicatorVector v = technical_indicators(*series, t, period);
            if (!indicators_defined(v)) continue;
            rows.emplace_back(series->firm_id(), series->bars()[t].week_index);
            vectors.push_back(v);
        }
    }
    FeatureMatrix matrix(names, std::move(rows));
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        auto arr = vectors[r].as_array();
        for (std::size_t c = 0; c < arr.size(); ++c) matrix.set(r, c, arr[c]);
    }
    return matrix;
}

std::string run_experiment(const ExperimentConfig& config, const std::string& config_text) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    auto out_path = [&](const std::string& name) { return config.out_dir + "/" + name; };
    auto open_out = [&](const std::string& name) {
        std::ofstream out(out_path(name));
        if (!out) throw io_error("cannot write " + out_path(name));
        return out;
    };

    log_info("loading reviews from " + config.reviews_path);
    LoadStats load_stats;
    auto reviews = load_reviews_file(config.reviews_path, config.on_malformed, &load_stats);
    auto filtered = filter_firms(reviews, config.min_reviews, config.min_span_months);
    log_info(std::to_string(filtered.eligible_firms.size()) + " firms eligible, " +
             std::to_string(filtered.reviews.size()) + " reviews");
    if (filtered.eligible_firms.empty())
        throw validation_error("run: no firms pass the review-count/span filters");

    log_info("building panel and features");
    Panel panel = build_weekly_aggregates(filtered.reviews);
    auto catalog = enumerate_catalog(default_window_specs());
    FeatureMatrix features = compute_features(panel, catalog, config.threads);
    log_info("feature matrix: " + std::to_string(features.num_rows()) + " rows x " +
             std::to_string(features.num_cols()) + " features");

    log_info("loading prices from " + config.prices_path);
    auto prices = load_prices_file(config.prices_path);
    auto weekly = weekly_bars(prices);
    auto samples = labeled_samples(weekly, config.split.horizon, config.split.cutoff);
    TargetPanel targets = build_target_panel(weekly);

    log_info("significance grid (" + std::to_string(features.num_cols()) + " features x " +
             std::to_string(config.max_shift) + " shifts x 12 targets)");
    SignificanceConfig sig_config;
    sig_config.alpha = config.alpha;
    sig_config.max_shift = config.max_shift;
    sig_config.raw_t_threshold = config.raw_t_threshold;
    sig_config.threads = config.threads;
    SignificanceTable table = significance_counts(features, targets, sig_config);

    TargetSelectionReport target_report = select_target(table, config.target_horizon);
    {
        auto out = open_out("target_report.csv");
        write_target_report_csv(out, target_report);
    }
    {
        auto out = open_out("significance.csv");
        write_significance_csv(out, table, config.target_horizon);
    }

    log_info("assembling datasets");
    DatasetPair data = assemble_dataset(features, samples, config.split);
    log_info("train " + std::to_string(data.train.rows()) + " rows, test " +
             std::to_string(data.test.rows()) + " rows");
    if (!leakage_free(data.train, config.split))
        throw validation_error("run: leakage audit failed");

    log_info("borderline sweep");
    LearnerSpec selection_learner = resolve_learner(config, config.selection_learner);
    BorderlineSweepResult sweep = feature_selection_sweep(
        data.train, table, config.target_horizon, config.borderline_grid.values(),
        selection_learner, config.cv_folds, config.seed, config.threads, config.stratify_cv);
    {
        auto out = open_out("borderline_curve.csv");
        write_borderline_csv(out, sweep);
    }
    log_info("best borderline " + std::to_string(sweep.best_borderline) + " keeps " +
             std::to_string(sweep.best_feature_set.size()) + " features");

    Dataset train_sel = restrict_columns(data.train, sweep.best_feature_set);
    Dataset test_sel = restrict_columns(data.test, sweep.best_feature_set);

    log_info("classifier tournament");
    std::vector<LearnerSpec> roster;
    for (const auto& name : config.roster) roster.push_back(resolve_learner(config, name));
    auto tournament = classifier_tournament(train_sel, roster, config.cv_folds, config.seed,
                                            config.threads, config.stratify_cv);
    {
        auto out = open_out("tournament.csv");
        write_tournament_csv(out, tournament);
    }

    log_info("hold-out: review features");
    LearnerSpec holdout_learner_spec = resolve_learner(config, config.holdout_learner);
    HoldoutResult holdout_reviews =
        holdout(train_sel, test_sel, holdout_learner_spec, config.seed, config.threads);

    log_info("hold-out: technical indicators");
    FeatureMatrix indicators = indicator_matrix(weekly, config.indicator_period);
    DatasetPair indicator_data = assemble_dataset(indicators, samples, config.split);
    HoldoutResult holdout_indicators = holdout(indicator_data.train, indicator_data.test,
                                               holdout_learner_spec, config.seed, config.threads);
    {
        auto out = open_out("holdout.csv");
        out << "model,accuracy,precision,recall,f_measure,random_value,positive_share,n_test\n";
        auto line = [&](const std::string& name, const HoldoutResult& r) {
            out << name << ',' << fmt(r.metrics.accuracy) << ',' << fmt(r.metrics.precision) << ','
                << fmt(r.metrics.recall) << ',' << fmt(r.metrics.f_measure) << ','
                << fmt(r.random_value) << ',' << fmt(r.positive_share) << ',' << r.metrics.n()
                << '\n';
        };
        line("reviews", holdout_reviews);
        line("indicators_10ti", holdout_indicators);
    }

    log_info("training-window sweep");
    std::vector<std::pair<Date, Date>> periods{{config.split.test_start, config.split.test_end}};
    for (const auto& p : config.extra_test_periods) periods.push_back(p);
    auto window_results =
        window_sweep(features, samples, config.split, config.window_lengths_weeks, periods,
                     holdout_learner_spec, config.seed, config.threads);
    {
        auto out = open_out("window_sweep.csv");
        write_window_sweep_csv(out, window_results);
    }

    log_info("tau sweep");
    auto tau_points = tau_sweep(train_sel, test_sel, holdout_learner_spec,
                                config.tau_grid.values(), config.seed, config.threads);
    {
        auto out = open_out("tau_sweep.csv");
        write_tau_sweep_csv(out, tau_points);
    }

    if (!config.sectors_path.empty()) {
        log_info("firm/sector report");
        SectorMap sectors = load_sectors_file(config.sectors_path);
        FirmSectorReport report = firm_sector_report(test_sel, holdout_reviews.predictions,
                                                     sectors, filtered.reviews);
        auto out = open_out("firm_sector_report.csv");
        write_firm_sector_csv(out, report);
    }

    RunManifest manifest;
    manifest.config_hash = hex64(fnv1a64(config_text));
    manifest.seed = config.seed;
    manifest.tool_version = kToolVersion;
    manifest.input_digests["reviews"] = file_digest(config.reviews_path);
    manifest.input_digests["prices"] = file_digest(config.prices_path);
    if (!config.sectors_path.empty())
        manifest.input_digests["sectors"] = file_digest(config.sectors_path);
    if (config.stamp_manifest) {
        std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        manifest.timestamp = buf;
    }
    {
        auto out = open_out("manifest.json");
        out << manifest.to_json() << '\n';
    }

    {
        auto out = open_out("summary.txt");
        out << "review-alpha run summary\n";
        out << "========================\n";
        out << "config_hash: " << manifest.config_hash << "\n";
        out << "seed: " << config.seed << "\n";
        out << "firms: " << filtered.eligible_firms.size() << "\n";
        out << "reviews: " << filtered.reviews.size() << " (skipped " << load_stats.skipped
            << ", duplicates " << load_stats.duplicates << ")\n";
        out << "feature catalog: " << features.num_cols() << " features\n";
        out << "train rows: " << data.train.rows() << ", test rows: " << data.test.rows() << "\n";
        out << "\ntarget selection (configured RW_" << config.target_horizon
            << ", best median RW_" << target_report.best_median_h << ")\n";
        out << "\nborderline sweep: best " << fmt(sweep.best_borderline, "%.2f") << " ("
            << sweep.best_feature_set.size() << " features, cv accuracy "
            << fmt(sweep.best_accuracy, "%.4f") << ")\n";
        out << "\ntournament (mean 5-fold cv accuracy)\n";
        for (const auto& row : tournament)
            out << "  " << row.name << ": "
                << (row.failed ? "failed: " + row.error : fmt(row.mean_accuracy, "%.4f")) << "\n";
        out << "\nhold-out\n";
        out << "  reviews:    acc " << fmt(holdout_reviews.metrics.accuracy, "%.4f") << "  prec "
            << fmt(holdout_reviews.metrics.precision, "%.4f") << "  rec "
            << fmt(holdout_reviews.metrics.recall, "%.4f") << "  f "
            << fmt(holdout_reviews.metrics.f_measure, "%.4f") << "  (random "
            << fmt(holdout_reviews.random_value, "%.4f") << ")\n";
        out << "  indicators: acc " << fmt(holdout_indicators.metrics.accuracy, "%.4f")
            << "  prec " << fmt(holdout_indicators.metrics.precision, "%.4f") << "  rec "
            << fmt(holdout_indicators.metrics.recall, "%.4f") << "  f "
            << fmt(holdout_indicators.metrics.f_measure, "%.4f") << "  (random "
            << fmt(holdout_indicators.random_value, "%.4f") << ")\n";
        out << "\nreference values from the original full-scale corpus (context only, not\n"
               "reproducible on desk-scale or synthetic data):\n";
        out << "  cv accuracy (boosted): " << fmt(reference::kCvAccuracyBoosted, "%.4f") << "\n";
        out << "  borderline peak: " << fmt(reference::kBorderlinePeakAccuracy, "%.4f") << " at "
            << fmt(reference::kBorderlinePeak, "%.2f") << " ("
            << reference::kBorderlinePeakFeatureCount << " features)\n";
        out << "  hold-out: reviews " << fmt(reference::kHoldoutAccuracyReviews, "%.4f")
            << " vs indicators " << fmt(reference::kHoldoutAccuracyIndicators, "%.4f")
            << " (random " << fmt(reference::kHoldoutRandomValue, "%.4f") << ")\n";
        out << "  tau extremes: " << fmt(reference::kTauMinAccuracy, "%.4f") << " @ 0.020, "
            << fmt(reference::kTauMaxAccuracy, "%.4f") << " @ 0.086\n";
    }
    return out_path("summary.txt");
}

}  // namespace ralpha
