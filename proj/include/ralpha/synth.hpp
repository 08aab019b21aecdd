#pragma once

// Deterministic synthetic corpora with controllable planted signal, plus
// the straight-from-definition feature oracle the test suites compare
// against.
//
// The planted mechanism: each (firm, week) carries a latent score z. Review
// fields are tilted by z through the planted families; the price drift of
// week v is return_effect * z[v - memory_weeks], so trailing review
// aggregates predict the forward return while weekly returns stay serially
// independent and the price history carries nothing.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ralpha/features.hpp"
#include "ralpha/ingest.hpp"
#include "ralpha/stats.hpp"

namespace ralpha {

// review-field families a latent tilt can be planted into
// volume | score | tendency | emotion | useful | image | mobile | days
struct PlantedEffect {
    std::string family;
    double strength = 0.0;
};

struct SynthSpec {
    int n_firms = 10;
    int weeks = 160;
    int n_sectors = 4;
    std::string start_date = "2014-01-06";  // a Monday

    double reviews_per_week_mean = 30.0;
    double review_dispersion = 2.0;  // gamma shape of the weekly intensity multiplier

    double return_effect = 0.0;     // theta: latent-to-drift scale
    double price_noise_vol = 0.02;  // sigma: weekly log-return noise
    int memory_weeks = 8;           // drift lag: week v drifts on z[v - memory_weeks]
    double base_price = 20.0;
    double holiday_rate = 0.0;      // probability a week has no trading days
    std::vector<double> sector_effect_multipliers;  // per sector, default all 1

    std::vector<PlantedEffect> planted;

    int horizon = 8;
    std::uint64_t seed = 1;

    static SynthSpec from_json_file(const std::string& path);
    static SynthSpec from_json_text(const std::string& text);
};

struct SynthResult {
    std::vector<ReviewRecord> reviews;
    std::vector<DailyBar> prices;
    std::map<std::string, std::string> sectors;  // firm -> sector name
    // generator-side weekly counters, for the schema round-trip check
    std::map<std::string, std::map<std::int32_t, WeekCounters>> expected_counts;
    double bayes_accuracy = 0.5;  // upper bound given perfect latent recovery
    std::string manifest_json;    // spec echo + ground truth summary
};

SynthResult generate(const SynthSpec& spec);

// writes reviews.jsonl, prices.csv, sectors.csv, manifest.json
void write_synth_corpus(const SynthResult& result, const std::string& out_dir);

// ---------------------------------------------------------------------------
// straight-from-definition feature oracle (test-side reference)
//
// Recomputes any catalog feature for one firm directly from raw review
// records, with no shared prefix sums and independently coded formulas.

class ReviewOracle {
public:
    ReviewOracle(const std::vector<ReviewRecord>& reviews, const std::string& firm_id);

    std::int32_t first_week() const { return first_week_; }
    std::int32_t last_week() const { return last_week_; }

    double feature(const FeatureKey& key, std::int32_t week) const;

private:
    std::vector<std::vector<ReviewRecord>> by_week_;  // index 0 == first_week_
    std::int32_t first_week_ = 0, last_week_ = -1;
};

// ---------------------------------------------------------------------------
// matrix-level planted corpus for the significance machinery
//
// Exactly n_signal_features columns carry the latent (in signal firms only);
// the rest are independent noise. Targets are genuine forward returns
// computed from a synthetic weekly close path whose drift embeds the latent
// with `memory_weeks` of memory.

struct MatrixCorpusSpec {
    int n_firms = 10;
    int signal_firms = 8;
    int weeks = 150;
    int n_features = 300;
    int n_signal_features = 20;
    double feature_noise = 0.35;
    double return_effect = 0.05;
    double price_noise = 0.01;
    int memory_weeks = 8;
    std::uint64_t seed = 7;
};

struct MatrixCorpus {
    FeatureMatrix features;
    TargetPanel targets{std::vector<FirmTargets>{}};
    std::vector<std::size_t> signal_features;  // column indices
    std::vector<std::string> signal_firm_ids;
};

MatrixCorpus generate_matrix_corpus(const MatrixCorpusSpec& spec);

}  // namespace ralpha
