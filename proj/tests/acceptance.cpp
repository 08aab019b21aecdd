// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Tolerances and thresholds are pinned in code; corpora are fixed
// by seed, so every number here is reproducible.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "ralpha/cli.hpp"
#include "ralpha/pipeline.hpp"
#include "ralpha/synth.hpp"
#include "reference_calcs.hpp"

using namespace ralpha;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. feature oracle equivalence: 5 firms x 80 weeks, full catalog,
//    identical undefined sets, 1e-12 relative, < 2 min

Outcome criterion1() {
    Outcome out;
    SynthSpec spec;
    spec.n_firms = 5;
    spec.weeks = 80;
    spec.reviews_per_week_mean = 18;
    spec.return_effect = 0.015;
    spec.planted = {{"score", 1.5}, {"volume", 0.8}, {"tendency", 1.2}, {"emotion", 1.0},
                    {"useful", 0.8}, {"image", 0.6}, {"mobile", 0.8}, {"days", 0.5}};
    spec.seed = 424242;
    auto corpus = generate(spec);

    Panel panel = build_weekly_aggregates(corpus.reviews);
    auto catalog = enumerate_catalog(default_window_specs());
    auto matrix = compute_features(panel, catalog, 2);
    out.note(std::to_string(matrix.num_rows()) + " rows x " + std::to_string(matrix.num_cols()) +
             " features");

    std::vector<ReviewOracle> oracles;
    std::vector<std::string> firm_ids;
    for (const auto& firm : panel.firms()) {
        oracles.emplace_back(corpus.reviews, firm.firm_id());
        firm_ids.push_back(firm.firm_id());
    }

    std::atomic<std::size_t> undef_mismatch{0}, value_mismatch{0};
    std::vector<double> worst_by_col(matrix.num_cols(), 0.0);
    parallel_for(matrix.num_cols(), 2, [&](std::size_t c) {
        const FeatureKey& key = matrix.catalog()[c];
        for (std::size_t f = 0; f < oracles.size(); ++f) {
            auto [lo, hi] = matrix.firm_rows(firm_ids[f]);
            for (std::size_t r = lo; r < hi; ++r) {
                double impl = matrix.at(r, c);
                double ref = oracles[f].feature(key, matrix.rows()[r].second);
                if (is_undefined(ref) != is_undefined(impl)) {
                    ++undef_mismatch;
                    continue;
                }
                if (is_undefined(ref)) continue;
                double err =
                    std::fabs(impl - ref) / std::max({1.0, std::fabs(impl), std::fabs(ref)});
                worst_by_col[c] = std::max(worst_by_col[c], err);
                if (err > 1e-12) ++value_mismatch;
            }
        }
    });
    double worst = *std::max_element(worst_by_col.begin(), worst_by_col.end());
    out.require(undef_mismatch == 0,
                std::to_string(undef_mismatch.load()) + " undefined-set mismatches");
    out.require(value_mismatch == 0,
                std::to_string(value_mismatch.load()) + " cells beyond 1e-12 relative");
    out.note("worst relative error " + fmt(worst));
    return out;
}

// ---------------------------------------------------------------------------
// 2. indicator golden values on a fixed 40-week fixture, 1e-9, < 1 s

Outcome criterion2() {
    Outcome out;
    Rng rng(1234);
    std::vector<DailyBar> daily;
    Date start = parse_date("2016-01-04");
    double close = 50.0;
    for (int w = 0; w < 40; ++w) {
        int days = 3 + static_cast<int>(rng.uniform_int(0, 2));
        for (int d = 0; d < days; ++d) {
            DailyBar bar;
            bar.firm_id = "F1";
            bar.trade_date = Date{start.days + 7 * w + d};
            bar.open = close;
            close *= std::exp(0.01 * rng.normal());
            bar.close = close;
            bar.high = std::max(bar.open, bar.close) * (1 + 0.004 * std::fabs(rng.normal()));
            bar.low = std::min(bar.open, bar.close) / (1 + 0.004 * std::fabs(rng.normal()));
            daily.push_back(bar);
        }
    }
    auto weekly = weekly_bars(daily);
    const auto& series = weekly[0];
    out.require(series.size() == 40, "fixture must span 40 weeks");

    testing::RefBars ref = testing::to_ref(series);
    const int n = 10;
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t t = 26 + n; t < series.size(); ++t) {
        IndicatorVector v = technical_indicators(series, t, n);
        const double expect[10] = {
            testing::ref_sma(ref, t, n),     testing::ref_wma(ref, t, n),
            testing::ref_momentum(ref, t, n), testing::ref_k(ref, t, n),
            testing::ref_d(ref, t, n),       testing::ref_rsi(ref, t, n),
            testing::ref_macd(ref, t),       testing::ref_williams(ref, t, n),
            testing::ref_ad(ref, t),         testing::ref_cci(ref, t, n)};
        auto actual = v.as_array();
        for (int k = 0; k < 10; ++k) {
            double err = std::fabs(actual[static_cast<std::size_t>(k)] - expect[k]) /
                         std::max(1.0, std::fabs(expect[k]));
            worst = std::max(worst, err);
            ++checked;
        }
    }
    out.require(checked == 40, "expected 4 defined positions x 10 indicators");
    out.require(worst <= 1e-9, "worst indicator error " + fmt(worst));
    out.note("worst relative error vs reference " + fmt(worst));
    return out;
}

// ---------------------------------------------------------------------------
// 3. pearson: 100 random 50-point pairs vs the high-precision reference to
//    1e-10; |rho| and p unchanged under min-max normalization

Outcome criterion3() {
    Outcome out;
    Rng rng(2024);
    double worst_rho = 0, worst_p = 0, worst_aff_rho = 0, worst_aff_p = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x, y;
        double coupling = rng.uniform(-1.2, 1.2);
        for (int i = 0; i < 50; ++i) {
            x.push_back(rng.normal());
            y.push_back(coupling * x.back() + rng.normal());
        }
        auto r = pearson(x, y);
        long double rho_ref = testing::ref_rho(x, y);
        long double p_ref = testing::ref_two_sided_p(r.t_stat, 48.0L);
        worst_rho = std::max(worst_rho, std::fabs(r.rho - static_cast<double>(rho_ref)));
        worst_p = std::max(worst_p, std::fabs(r.p - static_cast<double>(p_ref)));

        auto rn = pearson(minmax_normalize(x), y);
        worst_aff_rho = std::max(worst_aff_rho, std::fabs(std::fabs(rn.rho) - std::fabs(r.rho)));
        worst_aff_p = std::max(worst_aff_p, std::fabs(rn.p - r.p));
    }
    out.require(worst_rho <= 1e-10, "rho deviates " + fmt(worst_rho));
    out.require(worst_p <= 1e-10, "p deviates " + fmt(worst_p));
    out.require(worst_aff_rho <= 1e-12, "normalization changed |rho|");
    out.require(worst_aff_p <= 1e-11, "normalization changed p");
    out.note("max |drho|=" + fmt(worst_rho) + " max |dp|=" + fmt(worst_p));
    return out;
}

// ---------------------------------------------------------------------------
// 4. significance machinery on a planted matrix corpus

Outcome criterion4() {
    Outcome out;
    MatrixCorpusSpec spec;
    spec.n_firms = 10;       // I
    spec.signal_firms = 8;   // K
    spec.weeks = 150;
    spec.n_features = 300;
    spec.n_signal_features = 20;  // F*
    spec.feature_noise = 0.35;
    spec.return_effect = 0.05;
    spec.price_noise = 0.01;
    spec.seed = 7;
    auto corpus = generate_matrix_corpus(spec);

    SignificanceConfig config;
    config.threads = 2;
    auto table = significance_counts(corpus.features, corpus.targets, config);

    int min_planted_count = spec.n_firms;
    double planted_min_rate = 1.0;
    for (std::size_t f : corpus.signal_features) {
        min_planted_count = std::min(min_planted_count, table.count(f, 8));
        planted_min_rate = std::min(planted_min_rate, table.passing_rate(f, 8));
    }
    out.require(min_planted_count >= static_cast<int>(0.8 * spec.signal_firms),
                "planted min count " + std::to_string(min_planted_count) + " < 0.8K");

    int noise_below = 0, noise_total = 0;
    for (std::size_t f = static_cast<std::size_t>(spec.n_signal_features);
         f < static_cast<std::size_t>(spec.n_features); ++f) {
        ++noise_total;
        if (table.passing_rate(f, 8) < planted_min_rate) ++noise_below;
    }
    double below_share = static_cast<double>(noise_below) / noise_total;
    out.require(below_share >= 0.95, "only " + fmt(below_share) + " of noise features below "
                                     "the planted minimum");

    // sweep: best borderline must retain >= 90% of the planted features
    std::vector<LabeledSample> samples;
    for (const auto& firm : corpus.targets.firms())
        for (std::size_t w = 0; w < firm.rw.size(); ++w) {
            double rw = firm.rw[w][7];
            if (is_undefined(rw)) continue;
            samples.push_back({firm.firm_id, firm.first_week + static_cast<std::int32_t>(w), rw,
                               label(rw)});
        }
    SplitSpec split;
    split.train_start = parse_date("2014-01-06");
    split.train_end = parse_date("2016-03-31");
    split.test_start = parse_date("2016-04-01");
    split.test_end = parse_date("2016-08-31");
    auto data = assemble_dataset(corpus.features, samples, split);

    LearnerSpec learner = learner_preset("xgb");
    learner.gbm.n_rounds = 12;
    learner.gbm.max_depth = 3;
    GridSpec grid{0.0, 0.95, 0.05};
    auto sweep = feature_selection_sweep(data.train, table, 8, grid.values(), learner, 5, 11, 2);

    std::size_t planted_kept = 0;
    for (std::size_t f : corpus.signal_features)
        if (std::find(sweep.best_feature_set.begin(), sweep.best_feature_set.end(), f) !=
            sweep.best_feature_set.end())
            ++planted_kept;
    double kept_share = static_cast<double>(planted_kept) / corpus.signal_features.size();
    out.require(kept_share >= 0.9, "best borderline keeps only " + fmt(kept_share) +
                                   " of planted features");
    out.note("min planted count " + std::to_string(min_planted_count) + "/" +
             std::to_string(spec.signal_firms) + ", noise below: " + fmt(below_share) +
             ", best borderline " + fmt(sweep.best_borderline) + " keeps " + fmt(kept_share) +
             " of planted");
    return out;
}

// ---------------------------------------------------------------------------
// 5. gbm learning mechanics

Outcome criterion5() {
    Outcome out;

    // separable fixture: >= 99% training accuracy within 10 rounds
    {
        Rng rng(1);
        Matrix X(400, 6);
        std::vector<int> y(400);
        for (std::size_t r = 0; r < 400; ++r) {
            for (std::size_t c = 0; c < 6; ++c) X.at(r, c) = rng.normal();
            y[r] = X.at(r, 0) > 0.25 ? 1 : 0;
        }
        GbmConfig config;
        config.n_rounds = 10;
        config.max_depth = 2;
        config.subsample = 1.0;
        config.colsample = 1.0;
        auto model = train_gbm(X, y, config);
        double acc = evaluate(model.predict_label(X), y).accuracy;
        out.require(acc >= 0.99, "separable training accuracy " + fmt(acc));
        out.note("separable acc " + fmt(acc));
    }

    // gradient/hessian vs central finite differences within 1e-6
    {
        Rng rng(8);
        double worst = 0;
        for (int trial = 0; trial < 500; ++trial) {
            double y = rng.bernoulli(0.5) ? 1.0 : 0.0;
            double s = rng.uniform(-4, 4);
            const double eps = 1e-5;
            double gfd = (logistic_loss(y, s + eps) - logistic_loss(y, s - eps)) / (2 * eps);
            double hfd = (logistic_grad(y, s + eps) - logistic_grad(y, s - eps)) / (2 * eps);
            worst = std::max({worst, std::fabs(logistic_grad(y, s) - gfd),
                              std::fabs(logistic_hess(y, s) - hfd)});
        }
        out.require(worst <= 1e-6, "finite-difference deviation " + fmt(worst));
    }

    // split choice equals the exhaustive scan on <= 200-row fixtures
    {
        bool all_match = true;
        for (std::uint64_t seed = 50; seed < 60; ++seed) {
            Rng rng(seed);
            Matrix X(180, 5);
            std::vector<int> y(180);
            for (std::size_t r = 0; r < 180; ++r) {
                for (std::size_t c = 0; c < 5; ++c) X.at(r, c) = rng.normal();
                y[r] = X.at(r, 0) + 0.5 * X.at(r, 1) > 0 ? 1 : 0;
                if (rng.bernoulli(0.15)) y[r] = 1 - y[r];
            }
            std::vector<double> grad(X.rows), hess(X.rows);
            for (std::size_t r = 0; r < X.rows; ++r) {
                grad[r] = logistic_grad(y[r], 0.1);
                hess[r] = logistic_hess(y[r], 0.1);
            }
            std::vector<std::uint8_t> in_sample(X.rows, 1);
            std::vector<std::size_t> cols(X.cols);
            std::iota(cols.begin(), cols.end(), std::size_t{0});
            auto sorted = presort_columns(X, 1);
            Tree tree = build_tree(X, grad, hess, in_sample, cols, sorted, 1, 1.0, 0.0, 1.0, 2);

            // exhaustive reference scan
            double G = std::accumulate(grad.begin(), grad.end(), 0.0);
            double H = std::accumulate(hess.begin(), hess.end(), 0.0);
            double best_gain = 0;
            int best_feature = -1;
            double best_threshold = 0;
            for (std::size_t j = 0; j < X.cols; ++j) {
                std::vector<double> values;
                for (std::size_t r = 0; r < X.rows; ++r) values.push_back(X.at(r, j));
                std::sort(values.begin(), values.end());
                values.erase(std::unique(values.begin(), values.end()), values.end());
                for (std::size_t k = 1; k < values.size(); ++k) {
                    double thr = 0.5 * (values[k - 1] + values[k]);
                    double gl = 0, hl = 0;
                    for (std::size_t r = 0; r < X.rows; ++r)
                        if (X.at(r, j) < thr) {
                            gl += grad[r];
                            hl += hess[r];
                        }
                    if (hl < 1.0 || H - hl < 1.0) continue;
                    double gain = 0.5 * (gl * gl / (hl + 1.0) +
                                         (G - gl) * (G - gl) / (H - hl + 1.0) -
                                         G * G / (H + 1.0));
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = static_cast<int>(j);
                        best_threshold = thr;
                    }
                }
            }
            if (tree.nodes[0].feature != best_feature ||
                std::fabs(tree.nodes[0].threshold - best_threshold) > 1e-12)
                all_match = false;
        }
        out.require(all_match, "split search disagrees with the exhaustive scan");
    }

    // train loss non-increasing with full sampling
    {
        Rng rng(21);
        Matrix X(250, 6);
        std::vector<int> y(250);
        for (std::size_t r = 0; r < 250; ++r) {
            for (std::size_t c = 0; c < 6; ++c) X.at(r, c) = rng.normal();
            y[r] = X.at(r, 0) + 0.5 * X.at(r, 1) > 0 ? 1 : 0;
            if (rng.bernoulli(0.2)) y[r] = 1 - y[r];
        }
        GbmConfig config;
        config.n_rounds = 60;
        config.subsample = 1.0;
        config.colsample = 1.0;
        auto model = train_gbm(X, y, config);
        bool monotone = true;
        for (std::size_t i = 1; i < model.train_loss.size(); ++i)
            if (model.train_loss[i] > model.train_loss[i - 1] + 1e-12) monotone = false;
        out.require(monotone, "training loss increased between rounds");
    }
    return out;
}

// ---------------------------------------------------------------------------
// 6 & 7. end-to-end planted-signal hold-out and the tau sweep

SynthSpec planted_spec(std::uint64_t seed) {
    SynthSpec spec;
    spec.n_firms = 16;
    spec.weeks = 152;
    spec.reviews_per_week_mean = 35;
    spec.return_effect = 0.018;
    spec.price_noise_vol = 0.009;
    spec.memory_weeks = 8;
    spec.planted = {{"score", 2.0}, {"volume", 1.0}, {"tendency", 1.5},
                    {"useful", 1.2}, {"emotion", 1.5}, {"mobile", 1.0}};
    spec.seed = seed;
    return spec;
}

struct PlantedRun {
    HoldoutResult reviews, indicators;
    std::vector<TauPoint> taus;
};

PlantedRun run_planted(std::uint64_t seed, bool with_tau) {
    auto spec = planted_spec(seed);
    auto corpus = generate(spec);
    Panel panel = build_weekly_aggregates(corpus.reviews);
    auto catalog = enumerate_catalog(default_window_specs());
    auto features = compute_features(panel, catalog, 2);
    auto weekly = weekly_bars(corpus.prices);
    auto samples = labeled_samples(weekly, 8, 0.0);

    SplitSpec split;
    split.train_start = parse_date("2014-01-06");
    split.train_end = parse_date("2016-03-31");
    split.test_start = parse_date("2016-04-01");
    split.test_end = parse_date("2016-09-30");
    auto data = assemble_dataset(features, samples, split);
    auto ind = indicator_matrix(weekly, 10);
    auto ind_data = assemble_dataset(ind, samples, split);

    LearnerSpec learner = learner_preset("xgb");
    learner.gbm.n_rounds = 80;
    learner.gbm.max_depth = 3;
    learner.gbm.colsample = 0.4;

    PlantedRun run;
    run.reviews = holdout(data.train, data.test, learner, seed, 2);
    run.indicators = holdout(ind_data.train, ind_data.test, learner, seed, 2);
    if (with_tau)
        run.taus = tau_sweep(data.train, data.test, learner, {0.0, 0.05}, seed, 2);
    return run;
}

void criteria67(Outcome& c6, Outcome& c7) {
    double min_edge_ind = 1.0, min_edge_maj = 1.0;
    for (std::uint64_t seed = 101; seed <= 105; ++seed) {
        PlantedRun run = run_planted(seed, seed == 101);
        double edge_ind = run.reviews.metrics.accuracy - run.indicators.metrics.accuracy;
        double edge_maj = run.reviews.metrics.accuracy - run.reviews.random_value;
        min_edge_ind = std::min(min_edge_ind, edge_ind);
        min_edge_maj = std::min(min_edge_maj, edge_maj);
        if (seed == 101) {
            double delta = run.taus[1].accuracy - run.taus[0].accuracy;
            c7.require(run.taus[0].defined && run.taus[1].defined, "tau point undefined");
            c7.require(delta >= 0.03, "tau=0.05 gains only " + fmt(delta));
            c7.note("acc(tau=0)=" + fmt(run.taus[0].accuracy) + " acc(tau=0.05)=" +
                    fmt(run.taus[1].accuracy) + " (n=" + std::to_string(run.taus[1].n_test) +
                    ")");
        }
    }
    c6.require(min_edge_ind >= 0.05,
               "review-vs-indicator margin " + fmt(min_edge_ind) + " under 5 points");
    c6.require(min_edge_maj >= 0.08,
               "review-vs-majority margin " + fmt(min_edge_maj) + " under 8 points");
    c6.note("min margins over 5 seeds: vs indicators " + fmt(min_edge_ind) + ", vs majority " +
            fmt(min_edge_maj));
}

// ---------------------------------------------------------------------------
// 8. determinism across thread counts + the no-leakage audit

Outcome criterion8() {
    Outcome out;
    auto base = fs::temp_directory_path() / "ralpha_acceptance_run";
    fs::remove_all(base);
    fs::create_directories(base);

    SynthSpec spec;
    spec.n_firms = 5;
    spec.weeks = 90;
    spec.reviews_per_week_mean = 10;
    spec.return_effect = 0.02;
    spec.planted = {{"score", 1.5}, {"volume", 0.8}};
    spec.seed = 31;
    auto corpus = generate(spec);
    write_synth_corpus(corpus, (base / "data").string());

    std::ostringstream os;
    os << R"({
      "seed": 5,
      "reviews": ")" << (base / "data" / "reviews.jsonl").string() << R"(",
      "prices": ")" << (base / "data" / "prices.csv").string() << R"(",
      "sectors": ")" << (base / "data" / "sectors.csv").string() << R"(",
      "min_reviews": 0, "min_span_months": 0,
      "train_start": "2014-01-06", "train_end": "2015-03-31",
      "test_start": "2015-04-01", "test_end": "2015-07-31",
      "borderline_grid": {"start": 0, "stop": 0.75, "step": 0.25},
      "tau_grid": {"start": 0, "stop": 0.04, "step": 0.02},
      "window_lengths_weeks": [26, 52],
      "learners": ["xgb", "logistic"],
      "gbm": {"n_rounds": 10, "max_depth": 2, "colsample": 0.5},
      "cv_folds": 3,
      "out_dir": ")" << (base / "out").string() << R"("
    })";
    const std::string config_text = os.str();

    auto run_once = [&](int threads) {
        fs::remove_all(base / "out");
        auto config = ExperimentConfig::from_json_text(config_text);
        config.threads = threads;
        run_experiment(config, config_text);
        std::map<std::string, std::string> files;
        for (const auto& entry : fs::directory_iterator(base / "out")) {
            std::ifstream in(entry.path(), std::ios::binary);
            files[entry.path().filename().string()] =
                std::string((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        }
        return files;
    };
    auto a = run_once(1);
    auto b = run_once(2);
    out.require(a.size() >= 9, "run produced only " + std::to_string(a.size()) + " files");
    out.require(a == b, "outputs differ between thread counts");

    auto c = run_once(1);
    out.require(a == c, "outputs differ between identical reruns");
    out.note(std::to_string(a.size()) + " report files byte-identical across reruns and "
             "thread counts");

    // no-leakage audit: guard arithmetic over all training rows, plus a
    // point-in-time recomputation from a truncated review stream
    {
        auto reviews = load_reviews_file((base / "data" / "reviews.jsonl").string(),
                                         MalformedPolicy::Fail);
        Panel panel = build_weekly_aggregates(reviews);
        auto catalog = enumerate_catalog(default_window_specs());
        auto features = compute_features(panel, catalog, 2);
        auto weekly = weekly_bars(load_prices_file((base / "data" / "prices.csv").string()));
        auto samples = labeled_samples(weekly, 8, 0.0);
        auto config = ExperimentConfig::from_json_text(config_text);
        auto data = assemble_dataset(features, samples, config.split);
        out.require(leakage_free(data.train, config.split), "guard arithmetic audit failed");

        std::int32_t test_start_week = week_index_of(config.split.test_start);
        if (week_monday(test_start_week) < config.split.test_start) ++test_start_week;
        bool windows_ok = true;
        for (const auto& row : data.train.meta)
            if (row.week + config.split.gap_weeks >= test_start_week) windows_ok = false;
        out.require(windows_ok, "a training label window touches the test period");

        // truncation audit: features at week w must not move when reviews
        // after w are deleted
        Rng rng(99);
        std::size_t checked = 0;
        bool point_in_time = true;
        for (int trial = 0; trial < 5; ++trial) {
            const auto& row = data.train.meta[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(data.train.rows()) - 1))];
            std::vector<ReviewRecord> truncated;
            for (const auto& r : reviews)
                if (week_index_of(r.posted_at) <= row.week) truncated.push_back(r);
            Panel tpanel = build_weekly_aggregates(truncated);
            const FirmPanel* tf = tpanel.find(row.firm_id);
            if (!tf || tf->last_week() != row.week) continue;  // silent week: span shrank
            std::size_t full_row = features.find_row(row.firm_id, row.week);
            for (std::size_t c = 0; c < catalog.size(); c += 97) {
                double full = features.at(full_row, c);
                double trunc = feature_value(*tf, catalog[c], row.week);
                bool same = (is_undefined(full) && is_undefined(trunc)) || full == trunc;
                if (!same) point_in_time = false;
            }
            ++checked;
        }
        out.require(point_in_time, "feature values changed when future reviews were removed");
        out.require(checked >= 3, "too few point-in-time audit rows");
        out.note("point-in-time audit on " + std::to_string(checked) + " rows");
    }

    fs::remove_all(base);
    return out;
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        Outcome outcome;
        double seconds;
    };
    std::vector<Entry> entries;

    // stated runtime budgets are part of the criteria
    auto timed = [&](int id, const char* name, double budget_seconds, auto&& fn) {
        auto start = std::chrono::steady_clock::now();
        Outcome outcome = fn();
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
        if (budget_seconds > 0)
            outcome.require(secs <= budget_seconds,
                            "runtime " + fmt(secs) + "s exceeds " + fmt(budget_seconds) + "s");
        entries.push_back({id, name, std::move(outcome), secs});
    };

    timed(1, "feature-oracle-equivalence", 120.0, criterion1);
    timed(2, "indicator-golden-values", 1.0, criterion2);
    timed(3, "pearson-correctness", 0.0, criterion3);
    timed(4, "significance-machinery", 0.0, criterion4);
    timed(5, "gbm-learning", 0.0, criterion5);
    {
        auto start = std::chrono::steady_clock::now();
        Outcome c6, c7;
        criteria67(c6, c7);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
        c6.require(secs <= 600.0, "runtime " + fmt(secs) + "s exceeds 600s");
        entries.push_back({6, "planted-signal-holdout", std::move(c6), secs});
        entries.push_back({7, "tau-sweep-gain", std::move(c7), 0.0});
    }
    timed(8, "determinism-and-no-leakage", 0.0, criterion8);

    int failures = 0;
    for (const auto& e : entries) {
        if (!e.outcome.pass) ++failures;
        std::printf("[%s] criterion %d: %s", e.outcome.pass ? "PASS" : "FAIL", e.id, e.name);
        if (!e.outcome.detail.empty()) std::printf(" — %s", e.outcome.detail.c_str());
        if (e.seconds > 0) std::printf(" [%.1fs]", e.seconds);
        std::printf("\n");
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(entries.size()) - failures,
                entries.size());
    return failures;
}
