#include "ralpha/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ralpha/pipeline.hpp"
#include "ralpha/synth.hpp"

namespace ralpha {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    return out;
}

void write_dir_manifest(const std::string& out_dir, const std::string& config_text,
                        std::uint64_t seed, const std::vector<std::string>& input_paths,
                        bool stamp) {
    RunManifest manifest;
    manifest.config_hash = hex64(fnv1a64(config_text));
    manifest.seed = seed;
    manifest.tool_version = kToolVersion;
    for (const auto& path : input_paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw io_error("cannot open input for digest: " + path);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        manifest.input_digests[fs::path(path).filename().string()] = hex64(fnv1a64(bytes));
    }
    if (stamp) {
        std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        manifest.timestamp = buf;
    }
    auto out = open_out(out_dir + "/manifest.json");
    out << manifest.to_json() << '\n';
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// shared state for the per-step subcommands driven by a config file
struct PipelineContext {
    ExperimentConfig config;
    std::string config_text;
    FirmFilterResult reviews;
    Panel panel{std::vector<FirmPanel>{}};
    FeatureMatrix features;
    std::vector<WeeklySeries> weekly;
    std::vector<LabeledSample> samples;
};

PipelineContext load_context(const std::string& config_path, int threads_override) {
    PipelineContext ctx;
    ctx.config_text = read_file(config_path);
    ctx.config = ExperimentConfig::from_json_text(ctx.config_text);
    if (threads_override > 0) ctx.config.threads = threads_override;

    auto raw = load_reviews_file(ctx.config.reviews_path, ctx.config.on_malformed);
    ctx.reviews = filter_firms(raw, ctx.config.min_reviews, ctx.config.min_span_months);
    if (ctx.reviews.eligible_firms.empty())
        throw validation_error("no firms pass the review-count/span filters");
    ctx.panel = build_weekly_aggregates(ctx.reviews.reviews);
    ctx.features = compute_features(ctx.panel, enumerate_catalog(default_window_specs()),
                                    ctx.config.threads);
    auto prices = load_prices_file(ctx.config.prices_path);
    ctx.weekly = weekly_bars(prices);
    ctx.samples = labeled_samples(ctx.weekly, ctx.config.split.horizon, ctx.config.split.cutoff);
    return ctx;
}

SignificanceTable run_significance(const PipelineContext& ctx) {
    SignificanceConfig sc;
    sc.alpha = ctx.config.alpha;
    sc.max_shift = ctx.config.max_shift;
    sc.raw_t_threshold = ctx.config.raw_t_threshold;
    sc.threads = ctx.config.threads;
    return significance_counts(ctx.features, build_target_panel(ctx.weekly), sc);
}

LearnerSpec context_learner(const PipelineContext& ctx, const std::string& name) {
    LearnerSpec spec = learner_preset(name);
    if (ctx.config.has_gbm_overrides && spec.kind == LearnerKind::Gbm && name == "xgb")
        spec.gbm = ctx.config.gbm_overrides;
    return spec;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"review-alpha: long-horizon stock direction prediction from product reviews"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (overrides config)");

    // --- ingest ---------------------------------------------------------
    auto* cmd_ingest = app.add_subcommand("ingest", "validate and filter reviews and prices");
    std::string in_reviews, in_prices, in_out;
    int min_reviews = 1000, min_span_months = 12;
    std::string on_malformed = "skip";
    cmd_ingest->add_option("--reviews", in_reviews, "reviews JSONL")->required();
    cmd_ingest->add_option("--prices", in_prices, "prices CSV")->required();
    cmd_ingest->add_option("--min-reviews", min_reviews, "minimum reviews per firm");
    cmd_ingest->add_option("--min-span-months", min_span_months, "minimum review span, months");
    cmd_ingest->add_option("--on-malformed", on_malformed, "skip|fail")
        ->check(CLI::IsMember({"skip", "fail"}));
    cmd_ingest->add_option("--out", in_out, "output directory (cleaned data + panel dump)");

    // --- synth ----------------------------------------------------------
    auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic corpus");
    std::string synth_spec_path, synth_out;
    cmd_synth->add_option("--spec", synth_spec_path, "synth spec JSON")->required();
    cmd_synth->add_option("--out", synth_out, "output directory")->required();

    // --- features -------------------------------------------------------
    auto* cmd_features = app.add_subcommand("features", "compute the feature matrix");
    std::string ft_reviews, ft_out, ft_windows = "default";
    int ft_min_reviews = 0, ft_min_span = 0;
    cmd_features->add_option("--reviews", ft_reviews, "reviews JSONL")->required();
    cmd_features->add_option("--windows", ft_windows, "window preset (default)");
    cmd_features->add_option("--min-reviews", ft_min_reviews, "minimum reviews per firm");
    cmd_features->add_option("--min-span-months", ft_min_span, "minimum review span, months");
    cmd_features->add_option("--out", ft_out, "output directory")->required();

    // --- targets --------------------------------------------------------
    auto* cmd_targets = app.add_subcommand("targets", "weekly returns and labels");
    std::string tg_prices, tg_out;
    double tg_cutoff = 0.0;
    cmd_targets->add_option("--prices", tg_prices, "prices CSV")->required();
    cmd_targets->add_option("--cutoff", tg_cutoff, "label cut-off");
    cmd_targets->add_option("--out", tg_out, "output directory")->required();

    // --- config-driven steps --------------------------------------------
    std::string config_path;
    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON")->required();
    };
    auto* cmd_correlate = app.add_subcommand("correlate", "significance counts per feature");
    add_config(cmd_correlate);
    double corr_alpha = -1;
    int corr_shifts = -1;
    cmd_correlate->add_option("--alpha", corr_alpha, "significance level (overrides config)");
    cmd_correlate->add_option("--shifts", corr_shifts, "max shift (overrides config)");

    auto* cmd_select = app.add_subcommand("select-features", "passing-rate filter");
    add_config(cmd_select);
    double select_borderline = 0.2;
    cmd_select->add_option("--borderline", select_borderline, "passing-rate borderline");

    auto* cmd_tournament = app.add_subcommand("tournament", "cross-validated learner comparison");
    add_config(cmd_tournament);
    auto* cmd_holdout = app.add_subcommand("holdout", "train/test hold-out evaluation");
    add_config(cmd_holdout);
    std::string holdout_features = "reviews";
    cmd_holdout->add_option("--features", holdout_features, "reviews|indicators")
        ->check(CLI::IsMember({"reviews", "indicators"}));
    auto* cmd_sweep_b = app.add_subcommand("sweep-borderline", "feature-selection sweep");
    add_config(cmd_sweep_b);
    auto* cmd_sweep_w = app.add_subcommand("sweep-window", "training-window sweep");
    add_config(cmd_sweep_w);
    auto* cmd_sweep_t = app.add_subcommand("sweep-tau", "tau robustness sweep");
    add_config(cmd_sweep_t);
    auto* cmd_report = app.add_subcommand("report", "per-firm / sector report");
    add_config(cmd_report);
    auto* cmd_run = app.add_subcommand("run", "full experiment protocol");
    add_config(cmd_run);

    std::vector<const char*> argv;
    argv.push_back("review-alpha");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run 'review-alpha --help' for usage\n";
        return 1;
    }

    try {
        if (*cmd_ingest) {
            LoadStats stats;
            auto policy = on_malformed == "fail" ? MalformedPolicy::Fail : MalformedPolicy::Skip;
            auto reviews = load_reviews_file(in_reviews, policy, &stats);
            auto filtered = filter_firms(reviews, min_reviews, min_span_months);
            auto prices = load_prices_file(in_prices);
            std::cout << "reviews parsed: " << stats.parsed << " (skipped " << stats.skipped
                      << ", duplicates " << stats.duplicates << ")\n";
            std::cout << "eligible firms: " << filtered.eligible_firms.size() << "\n";
            std::cout << "price rows: " << prices.size() << "\n";
            if (!in_out.empty()) {
                fs::create_directories(in_out);
                {
                    auto out = open_out(in_out + "/reviews.jsonl");
                    write_reviews_jsonl(out, filtered.reviews);
                }
                {
                    auto out = open_out(in_out + "/prices.csv");
                    write_prices_csv(out, prices);
                }
                {
                    auto out = open_out(in_out + "/panel.csv");
                    write_panel_csv(out, build_weekly_aggregates(filtered.reviews));
                }
                write_dir_manifest(in_out, "ingest " + in_reviews + " " + in_prices, 0,
                                   {in_reviews, in_prices}, false);
            }
            return 0;
        }
        if (*cmd_synth) {
            auto spec_text = read_file(synth_spec_path);
            auto spec = SynthSpec::from_json_text(spec_text);
            auto result = generate(spec);
            write_synth_corpus(result, synth_out);
            write_dir_manifest(synth_out, spec_text, spec.seed, {synth_spec_path}, false);
            std::cout << "wrote " << result.reviews.size() << " reviews, " << result.prices.size()
                      << " price rows to " << synth_out << "\n";
            return 0;
        }
        if (*cmd_features) {
            if (ft_windows != "default")
                throw validation_error("unknown window preset '" + ft_windows + "'");
            auto reviews = load_reviews_file(ft_reviews, MalformedPolicy::Fail);
            auto filtered = filter_firms(reviews, ft_min_reviews, ft_min_span);
            auto panel = build_weekly_aggregates(filtered.reviews);
            auto catalog = enumerate_catalog(default_window_specs());
            auto matrix = compute_features(panel, catalog, threads > 0 ? threads : 1);
            fs::create_directories(ft_out);
            {
                auto out = open_out(ft_out + "/features.csv");
                write_features_csv(out, matrix);
            }
            {
                auto out = open_out(ft_out + "/catalog.csv");
                write_catalog_manifest(out, catalog);
            }
            write_dir_manifest(ft_out, "features " + ft_reviews, 0, {ft_reviews}, false);
            std::cout << "catalog: " << catalog.size() << " features; rows: " << matrix.num_rows()
                      << "\n";
            return 0;
        }
        if (*cmd_targets) {
            auto prices = load_prices_file(tg_prices);
            auto weekly = weekly_bars(prices);
            fs::create_directories(tg_out);
            {
                auto out = open_out(tg_out + "/targets.csv");
                write_targets_csv(out, weekly, tg_cutoff);
            }
            {
                auto out = open_out(tg_out + "/indicators.csv");
                write_indicators_csv(out, weekly);
            }
            write_dir_manifest(tg_out, "targets " + tg_prices, 0, {tg_prices}, false);
            return 0;
        }

        if (*cmd_run) {
            auto config_text = read_file(config_path);
            auto config = ExperimentConfig::from_json_text(config_text);
            if (threads > 0) config.threads = threads;
            std::string summary = run_experiment(config, config_text);
            std::cout << "wrote " << summary << "\n";
            return 0;
        }

        if (*cmd_correlate || *cmd_select || *cmd_tournament || *cmd_holdout || *cmd_sweep_b ||
            *cmd_sweep_w || *cmd_sweep_t || *cmd_report) {
            PipelineContext ctx = load_context(config_path, threads);
            if (*cmd_correlate) {
                if (corr_alpha > 0) ctx.config.alpha = corr_alpha;
                if (corr_shifts > 0) ctx.config.max_shift = corr_shifts;
            }
            fs::create_directories(ctx.config.out_dir);
            std::vector<std::string> inputs{ctx.config.reviews_path, ctx.config.prices_path};
            write_dir_manifest(ctx.config.out_dir, ctx.config_text, ctx.config.seed, inputs,
                               ctx.config.stamp_manifest);

            if (*cmd_correlate) {
                auto table = run_significance(ctx);
                auto report = select_target(table, ctx.config.target_horizon);
                {
                    auto out = open_out(ctx.config.out_dir + "/significance.csv");
                    write_significance_csv(out, table, ctx.config.target_horizon);
                }
                {
                    auto out = open_out(ctx.config.out_dir + "/target_report.csv");
                    write_target_report_csv(out, report);
                }
                return 0;
            }
            if (*cmd_select) {
                auto table = run_significance(ctx);
                auto kept = passing_rate_filter(table, ctx.config.target_horizon,
                                                select_borderline);
                auto out = open_out(ctx.config.out_dir + "/selected_features.csv");
                out << "index,name,passing_rate\n";
                for (auto f : kept)
                    out << f << ',' << table.feature_names()[f] << ','
                        << table.passing_rate(f, ctx.config.target_horizon) << '\n';
                std::cout << kept.size() << " features at borderline " << select_borderline
                          << "\n";
                return 0;
            }

            DatasetPair data = assemble_dataset(ctx.features, ctx.samples, ctx.config.split);
            if (*cmd_tournament) {
                std::vector<LearnerSpec> roster;
                for (const auto& name : ctx.config.roster)
                    roster.push_back(context_learner(ctx, name));
                auto rows = classifier_tournament(data.train, roster, ctx.config.cv_folds,
                                                  ctx.config.seed, ctx.config.threads,
                                                  ctx.config.stratify_cv);
                auto out = open_out(ctx.config.out_dir + "/tournament.csv");
                write_tournament_csv(out, rows);
                return 0;
            }
            if (*cmd_holdout) {
                LearnerSpec learner = context_learner(ctx, ctx.config.holdout_learner);
                HoldoutResult result;
                if (holdout_features == "indicators") {
                    auto ind = indicator_matrix(ctx.weekly, ctx.config.indicator_period);
                    DatasetPair ind_data = assemble_dataset(ind, ctx.samples, ctx.config.split);
                    result = holdout(ind_data.train, ind_data.test, learner, ctx.config.seed,
                                     ctx.config.threads);
                } else {
                    result = holdout(data.train, data.test, learner, ctx.config.seed,
                                     ctx.config.threads);
                }
                auto out = open_out(ctx.config.out_dir + "/holdout.csv");
                write_holdout_csv(out, holdout_features, result);
                std::cout << "holdout accuracy " << result.metrics.accuracy << " (random "
                          << result.random_value << ")\n";
                return 0;
            }
            if (*cmd_sweep_b) {
                auto table = run_significance(ctx);
                auto sweep = feature_selection_sweep(
                    data.train, table, ctx.config.target_horizon,
                    ctx.config.borderline_grid.values(),
                    context_learner(ctx, ctx.config.selection_learner), ctx.config.cv_folds,
                    ctx.config.seed, ctx.config.threads, ctx.config.stratify_cv);
                auto out = open_out(ctx.config.out_dir + "/borderline_curve.csv");
                write_borderline_csv(out, sweep);
                return 0;
            }
            if (*cmd_sweep_w) {
                std::vector<std::pair<Date, Date>> periods{
                    {ctx.config.split.test_start, ctx.config.split.test_end}};
                for (const auto& p : ctx.config.extra_test_periods) periods.push_back(p);
                auto results = window_sweep(ctx.features, ctx.samples, ctx.config.split,
                                            ctx.config.window_lengths_weeks, periods,
                                            context_learner(ctx, ctx.config.holdout_learner),
                                            ctx.config.seed, ctx.config.threads);
                auto out = open_out(ctx.config.out_dir + "/window_sweep.csv");
                write_window_sweep_csv(out, results);
                return 0;
            }
            if (*cmd_sweep_t) {
                auto points = tau_sweep(data.train, data.test,
                                        context_learner(ctx, ctx.config.holdout_learner),
                                        ctx.config.tau_grid.values(), ctx.config.seed,
                                        ctx.config.threads);
                auto out = open_out(ctx.config.out_dir + "/tau_sweep.csv");
                write_tau_sweep_csv(out, points);
                return 0;
            }
            if (*cmd_report) {
                if (ctx.config.sectors_path.empty())
                    throw validation_error("report: config must set 'sectors'");
                auto sectors = load_sectors_file(ctx.config.sectors_path);
                auto result = holdout(data.train, data.test,
                                      context_learner(ctx, ctx.config.holdout_learner),
                                      ctx.config.seed, ctx.config.threads);
                auto report = firm_sector_report(data.test, result.predictions, sectors,
                                                 ctx.reviews.reviews);
                auto out = open_out(ctx.config.out_dir + "/firm_sector_report.csv");
                write_firm_sector_csv(out, report);
                return 0;
            }
        }
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace ralpha
