#include "ralpha/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "ralpha/market.hpp"
#include "ralpha/panel.hpp"

namespace ralpha {

using nlohmann::json;

SynthSpec SynthSpec::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error(std::string("synth spec: invalid JSON: ") + e.what());
    }
    SynthSpec s;
    s.n_firms = j.value("n_firms", s.n_firms);
    s.weeks = j.value("weeks", s.weeks);
    s.n_sectors = j.value("n_sectors", s.n_sectors);
    s.start_date = j.value("start_date", s.start_date);
    s.reviews_per_week_mean = j.value("reviews_per_week_mean", s.reviews_per_week_mean);
    s.review_dispersion = j.value("review_dispersion", s.review_dispersion);
    s.return_effect = j.value("return_effect", s.return_effect);
    s.price_noise_vol = j.value("price_noise_vol", s.price_noise_vol);
    s.memory_weeks = j.value("memory_weeks", s.memory_weeks);
    s.base_price = j.value("base_price", s.base_price);
    s.holiday_rate = j.value("holiday_rate", s.holiday_rate);
    s.horizon = j.value("horizon", s.horizon);
    s.seed = j.value("seed", s.seed);
    if (j.contains("sector_effect_multipliers"))
        s.sector_effect_multipliers = j["sector_effect_multipliers"].get<std::vector<double>>();
    if (j.contains("planted")) {
        for (const auto& p : j["planted"])
            s.planted.push_back({p.at("family").get<std::string>(), p.at("strength").get<double>()});
    }
    if (s.n_firms < 1 || s.weeks < 4 || s.n_sectors < 1 || s.memory_weeks < 1)
        throw validation_error("synth spec: invalid sizes");
    return s;
}

SynthSpec SynthSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open synth spec: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

namespace {

struct FamilyStrengths {
    double volume = 0, score = 0, tendency = 0, emotion = 0, useful = 0, image = 0, mobile = 0,
           days = 0;
};

FamilyStrengths resolve_planted(const std::vector<PlantedEffect>& planted) {
    FamilyStrengths s;
    for (const auto& p : planted) {
        if (p.family == "volume") s.volume = p.strength;
        else if (p.family == "score") s.score = p.strength;
        else if (p.family == "tendency") s.tendency = p.strength;
        else if (p.family == "emotion") s.emotion = p.strength;
        else if (p.family == "useful") s.useful = p.strength;
        else if (p.family == "image") s.image = p.strength;
        else if (p.family == "mobile") s.mobile = p.strength;
        else if (p.family == "days") s.days = p.strength;
        else throw validation_error("unknown planted family '" + p.family + "'");
    }
    return s;
}

int draw_weighted(Rng& rng, const double* weights, int count) {
    double total = 0;
    for (int i = 0; i < count; ++i) total += weights[i];
    double u = rng.next_double() * total;
    for (int i = 0; i < count; ++i) {
        u -= weights[i];
        if (u < 0) return i;
    }
    return count - 1;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// per-sector user-level mixes (ordinary, silver, gold, diamond)
const double kLevelProfiles[4][4] = {{0.50, 0.25, 0.15, 0.10},
                                     {0.35, 0.30, 0.20, 0.15},
                                     {0.20, 0.25, 0.30, 0.25},
                                     {0.10, 0.15, 0.25, 0.50}};

ReviewRecord make_review(Rng& rng, const std::string& firm_id, std::int32_t week, int index,
                         double z, const FamilyStrengths& s) {
    ReviewRecord r;
    r.firm_id = firm_id;
    r.product_id = firm_id + "_P" + std::to_string(index % 40);
    r.review_id = firm_id + "_W" + std::to_string(week) + "_R" + std::to_string(index);
    r.posted_at = Date{week_monday(week).days + static_cast<std::int32_t>(rng.uniform_int(0, 6))};

    if (rng.bernoulli(0.08)) {
        // system-generated five-star review on comment-window close
        r.is_default = true;
        r.star = 5;
        r.days = 15;
        r.user_client = Client::Web;
        r.is_mobile = false;
        return r;
    }

    double star_w[5];
    for (int st = 1; st <= 5; ++st) {
        static const double base[5] = {0.06, 0.04, 0.08, 0.20, 0.62};
        star_w[st - 1] = base[st - 1] * std::exp(s.score * z * (st - 3) / 2.0);
    }
    r.star = 1 + draw_weighted(rng, star_w, 5);

    r.days = std::min(365, static_cast<int>(-6.0 * std::exp(-0.3 * s.days * z) *
                                            std::log(1.0 - rng.next_double())));
    r.useful_votes = rng.poisson(0.3 * std::exp(0.5 * s.useful * z));
    r.useless_votes = rng.poisson(0.1 * std::exp(-0.3 * s.useful * z));
    r.reply_count = rng.poisson(0.05);
    r.image_count = rng.poisson(0.25 * std::exp(0.5 * s.image * z));

    if (rng.bernoulli(0.35)) {
        if (rng.bernoulli(logistic(1.2 + s.emotion * z))) {
            r.emotion = kEmotionJoy;
        } else {
            static const double neg_w[4] = {0.30, 0.25, 0.25, 0.20};  // anger, disgust, sadness, fear
            static const int neg_codes[4] = {0, 1, 3, 4};
            r.emotion = neg_codes[draw_weighted(rng, neg_w, 4)];
        }
    }

    r.pos_words = rng.poisson(1.2 * std::exp(0.4 * s.tendency * z));
    r.neg_words = rng.poisson(0.5 * std::exp(-0.4 * s.tendency * z));

    if (rng.bernoulli(logistic(0.8 + s.mobile * z))) {
        static const double client_w[3] = {0.40, 0.45, 0.15};
        static const Client clients[3] = {Client::IPhone, Client::Android, Client::WeChat};
        r.user_client = clients[draw_weighted(rng, client_w, 3)];
        r.is_mobile = true;
    } else {
        r.user_client = Client::Web;
        r.is_mobile = false;
    }
    return r;
}

// Weekly close path. The drift of week v is theta * z[v - lag]: trailing
// review aggregates (which reveal the latents up to the current week) see
// the next `lag` weeks of drift coming, while weekly returns stay serially
// independent, so the price history alone carries no signal about them.
std::vector<double> close_path(const std::vector<double>& z, double theta, double sigma, int lag,
                               double base_price, Rng& rng) {
    std::vector<double> closes(z.size());
    double log_price = std::log(base_price);
    for (std::size_t w = 0; w < z.size(); ++w) {
        double drift = 0.0;
        if (w >= static_cast<std::size_t>(lag)) drift = theta * z[w - static_cast<std::size_t>(lag)];
        log_price += drift + sigma * rng.normal();
        closes[w] = std::exp(log_price);
    }
    return closes;
}

// Bayes accuracy upper bound for sign prediction given perfect latent
// recovery: of the horizon's drift terms, min(horizon, lag) are observable
// at prediction time; the rest plus the price noise are hidden.
// P(sign match) = 1/2 + atan(sd_obs / sd_hidden) / pi.
double bayes_accuracy_bound(double theta, double sigma, int lag, int horizon) {
    if (theta == 0.0) return 0.5;
    double observable = std::min(horizon, lag);
    double obs = theta * theta * observable;
    double hidden = theta * theta * (horizon - observable) + sigma * sigma * horizon;
    return 0.5 + std::atan(std::sqrt(obs / hidden)) / M_PI;
}

}  // namespace

SynthResult generate(const SynthSpec& spec) {
    FamilyStrengths strengths = resolve_planted(spec.planted);
    Date start = parse_date(spec.start_date);
    std::int32_t first_week = week_index_of(start);

    SynthResult result;
    double bayes_sum = 0.0;

    for (int f = 0; f < spec.n_firms; ++f) {
        char firm_buf[16];
        std::snprintf(firm_buf, sizeof firm_buf, "F%03d", f);
        std::string firm_id = firm_buf;
        int sector = f % spec.n_sectors;
        result.sectors[firm_id] = "sector_" + std::to_string(sector);

        double mult = sector < static_cast<int>(spec.sector_effect_multipliers.size())
                          ? spec.sector_effect_multipliers[static_cast<std::size_t>(sector)]
                          : 1.0;
        double theta = spec.return_effect * mult;
        bayes_sum += bayes_accuracy_bound(theta, spec.price_noise_vol, spec.memory_weeks,
                                          spec.horizon);

        Rng latent_rng(spec.seed, "latent-" + firm_id);
        Rng review_rng(spec.seed, "reviews-" + firm_id);
        Rng price_rng(spec.seed, "prices-" + firm_id);
        Rng level_rng(spec.seed, "levels-" + firm_id);

        std::vector<double> z(static_cast<std::size_t>(spec.weeks));
        for (auto& v : z) v = latent_rng.normal();

        // reviews
        auto& firm_counts = result.expected_counts[firm_id];
        for (int w = 0; w < spec.weeks; ++w) {
            std::int32_t week = first_week + w;
            double zmul = std::exp(0.5 * strengths.volume * z[static_cast<std::size_t>(w)]);
            double intensity = spec.reviews_per_week_mean * zmul *
                               review_rng.gamma(spec.review_dispersion) / spec.review_dispersion;
            int count = review_rng.poisson(intensity);
            if (w == 0 || w == spec.weeks - 1) count = std::max(count, 1);  // pin the span
            WeekCounters counters{};
            for (int i = 0; i < count; ++i) {
                ReviewRecord r = make_review(review_rng, firm_id, week, i,
                                             z[static_cast<std::size_t>(w)], strengths);
                const double* lw = kLevelProfiles[sector % 4];
                if (level_rng.bernoulli(0.9))
                    r.user_level = static_cast<UserLevel>(draw_weighted(level_rng, lw, 4));
                accumulate_review(counters, r);
                result.reviews.push_back(std::move(r));
            }
            firm_counts[week] = counters;
        }

        // prices: trailing-latent drift, iid noise; review weeks only
        auto closes = close_path(z, theta, spec.price_noise_vol, spec.memory_weeks,
                                 spec.base_price, price_rng);
        double prev_close = spec.base_price;
        for (int w = 0; w < spec.weeks; ++w) {
            if (spec.holiday_rate > 0 && price_rng.bernoulli(spec.holiday_rate)) {
                prev_close = closes[static_cast<std::size_t>(w)];
                continue;
            }
            std::int32_t monday = week_monday(first_week + w).days;
            double week_close = closes[static_cast<std::size_t>(w)];
            double day_open = prev_close;
            for (int d = 0; d < 5; ++d) {
                double frac = (d + 1) / 5.0;
                double day_close =
                    d == 4 ? week_close
                           : prev_close * std::pow(week_close / prev_close, frac) *
                                 std::exp(0.004 * price_rng.normal());
                DailyBar bar;
                bar.firm_id = firm_id;
                bar.trade_date = Date{monday + d};
                bar.open = day_open;
                bar.close = day_close;
                double pad_hi = 1.0 + 0.003 * std::fabs(price_rng.normal());
                double pad_lo = 1.0 + 0.003 * std::fabs(price_rng.normal());
                bar.high = std::max(day_open, day_close) * pad_hi;
                bar.low = std::min(day_open, day_close) / pad_lo;
                result.prices.push_back(bar);
                day_open = day_close;
            }
            prev_close = week_close;
        }
    }
    result.bayes_accuracy = bayes_sum / spec.n_firms;

    std::sort(result.reviews.begin(), result.reviews.end(),
              [](const ReviewRecord& a, const ReviewRecord& b) {
                  if (a.firm_id != b.firm_id) return a.firm_id < b.firm_id;
                  if (a.posted_at != b.posted_at) return a.posted_at < b.posted_at;
                  if (a.product_id != b.product_id) return a.product_id < b.product_id;
                  return a.review_id < b.review_id;
              });

    json manifest;
    manifest["generator"] = "review-alpha synth";
    manifest["seed"] = spec.seed;
    manifest["n_firms"] = spec.n_firms;
    manifest["weeks"] = spec.weeks;
    manifest["start_date"] = spec.start_date;
    manifest["reviews_per_week_mean"] = spec.reviews_per_week_mean;
    manifest["review_dispersion"] = spec.review_dispersion;
    manifest["weekly_intensity_family"] = "poisson-gamma mixture (negative-binomial-like)";
    manifest["return_effect"] = spec.return_effect;
    manifest["price_noise_vol"] = spec.price_noise_vol;
    manifest["memory_weeks"] = spec.memory_weeks;
    manifest["horizon"] = spec.horizon;
    manifest["holiday_rate"] = spec.holiday_rate;
    manifest["bayes_accuracy_upper_bound"] = result.bayes_accuracy;
    json planted = json::array();
    for (const auto& p : spec.planted)
        planted.push_back({{"family", p.family}, {"strength", p.strength}});
    manifest["planted"] = std::move(planted);
    json sectors;
    for (const auto& [firm, sec] : result.sectors) sectors[firm] = sec;
    manifest["sectors"] = std::move(sectors);
    result.manifest_json = manifest.dump(2);
    return result;
}

void write_synth_corpus(const SynthResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/reviews.jsonl");
        if (!out) throw io_error("cannot write " + out_dir + "/reviews.jsonl");
        write_reviews_jsonl(out, result.reviews);
    }
    {
        std::ofstream out(out_dir + "/prices.csv");
        if (!out) throw io_error("cannot write " + out_dir + "/prices.csv");
        write_prices_csv(out, result.prices);
    }
    {
        std::ofstream out(out_dir + "/sectors.csv");
        if (!out) throw io_error("cannot write " + out_dir + "/sectors.csv");
        out << "firm_id,sector\n";
        for (const auto& [firm, sector] : result.sectors) out << firm << ',' << sector << '\n';
    }
    {
        std::ofstream out(out_dir + "/manifest.json");
        if (!out) throw io_error("cannot write " + out_dir + "/manifest.json");
        out << result.manifest_json << '\n';
    }
}

// ---------------------------------------------------------------------------
// feature oracle

ReviewOracle::ReviewOracle(const std::vector<ReviewRecord>& reviews, const std::string& firm_id) {
    std::vector<ReviewRecord> mine;
    for (const auto& r : reviews)
        if (r.firm_id == firm_id) mine.push_back(r);
    if (mine.empty()) throw validation_error("oracle: no reviews for firm " + firm_id);
    first_week_ = INT32_MAX;
    last_week_ = INT32_MIN;
    for (const auto& r : mine) {
        std::int32_t w = week_index_of(r.posted_at);
        first_week_ = std::min(first_week_, w);
        last_week_ = std::max(last_week_, w);
    }
    by_week_.resize(static_cast<std::size_t>(last_week_ - first_week_) + 1);
    for (auto& r : mine)
        by_week_[static_cast<std::size_t>(week_index_of(r.posted_at) - first_week_)].push_back(
            std::move(r));
}

namespace {

double oracle_review_tendency(const ReviewRecord& r) {
    int total = r.pos_words + r.neg_words;
    if (total == 0) return 0.0;
    double ten = static_cast<double>(r.pos_words - r.neg_words) / total;
    return std::round(ten * 1048576.0) / 1048576.0;  // same 2^-20 grid as the panel
}

}  // namespace

double ReviewOracle::feature(const FeatureKey& key, std::int32_t week) const {
    // direct per-record accumulation over the window's weeks
    auto window_sum = [&](int n, std::int32_t i, auto&& per_review) -> double {
        if (i - n + 1 < first_week_ || i > last_week_) return undef();
        double total = 0.0;
        for (std::int32_t w = i - n + 1; w <= i; ++w) {
            if (w < first_week_) continue;
            for (const auto& r : by_week_[static_cast<std::size_t>(w - first_week_)])
                total += per_review(r);
        }
        return total;
    };

    auto base = [&](BaseId b, int n, std::int32_t i) -> double {
        switch (b) {
            case BaseId::Review:
                return window_sum(n, i, [](const ReviewRecord&) { return 1.0; });
            case BaseId::Star1:
            case BaseId::Star2:
            case BaseId::Star3:
            case BaseId::Star4:
            case BaseId::Star5: {
                int s = 1 + static_cast<int>(b) - static_cast<int>(BaseId::Star1);
                return window_sum(n, i, [s](const ReviewRecord& r) { return r.star == s ? 1.0 : 0.0; });
            }
            case BaseId::Star15: {
                double five = window_sum(n, i, [](const ReviewRecord& r) { return r.star == 5 ? 1.0 : 0.0; });
                double one = window_sum(n, i, [](const ReviewRecord& r) { return r.star == 1 ? 1.0 : 0.0; });
                if (is_undefined(five) || is_undefined(one)) return undef();
                return five - one;
            }
            case BaseId::Default:
                return window_sum(n, i, [](const ReviewRecord& r) { return r.is_default ? 1.0 : 0.0; });
            case BaseId::Score: {
                double count = window_sum(n, i, [](const ReviewRecord&) { return 1.0; });
                if (is_undefined(count) || count == 0.0) return undef();
                double weighted = 0.0;
                for (int s = 1; s <= 5; ++s)
                    weighted += s * window_sum(n, i, [s](const ReviewRecord& r) {
                        return r.star == s ? 1.0 : 0.0;
                    });
                return weighted / count;
            }
            case BaseId::Emotion0:
            case BaseId::Emotion1:
            case BaseId::Emotion2:
            case BaseId::Emotion3:
            case BaseId::Emotion4: {
                int e = static_cast<int>(b) - static_cast<int>(BaseId::Emotion0);
                return window_sum(n, i, [e](const ReviewRecord& r) {
                    return r.emotion && *r.emotion == e ? 1.0 : 0.0;
                });
            }
            case BaseId::EmotionAll: {
                double total = 0.0;
                for (int e = 0; e < kNumEmotions; ++e) {
                    double c = window_sum(n, i, [e](const ReviewRecord& r) {
                        return r.emotion && *r.emotion == e ? 1.0 : 0.0;
                    });
                    if (is_undefined(c)) return undef();
                    total += c;
                }
                return total;
            }
            case BaseId::EmotionNegative:
                return window_sum(n, i, [](const ReviewRecord& r) {
                    return r.emotion && *r.emotion != kEmotionJoy ? 1.0 : 0.0;
                });
            case BaseId::TendencyPosW:
                return window_sum(n, i, [](const ReviewRecord& r) { return double(r.pos_words); });
            case BaseId::TendencyNegW:
                return window_sum(n, i, [](const ReviewRecord& r) { return double(r.neg_words); });
            case BaseId::TendencyWord: {
                double pos = window_sum(n, i, [](const ReviewRecord& r) { return double(r.pos_words); });
                double neg = window_sum(n, i, [](const ReviewRecord& r) { return double(r.neg_words); });
                if (is_undefined(pos) || is_undefined(neg) || pos + neg == 0.0) return undef();
                return (pos - neg) / (pos + neg);
            }
            case BaseId::TendencyPosR:
                return window_sum(n, i, [](const ReviewRecord& r) {
                    return r.pos_words > r.neg_words ? 1.0 : 0.0;
                });
            case BaseId::TendencyNegR:
                return window_sum(n, i, [](const ReviewRecord& r) {
                    return r.pos_words < r.neg_words ? 1.0 : 0.0;
                });
            case BaseId::TendencyPos:
                return window_sum(n, i, [](const ReviewRecord& r) {
                    return r.pos_words > r.neg_words ? oracle_review_tendency(r) : 0.0;
                });
            case BaseId::TendencyNeg:
                return window_sum(n, i, [](const ReviewRecord& r) {
                    return r.pos_words < r.neg_words ? oracle_review_tendency(r) : 0.0;
                });
            case BaseId::TendencyAll: {
                double pos = window_sum(n, i, [](const ReviewRecord& r) {
                    return r.pos_words > r.neg_words ? oracle_review_tendency(r) : 0.0;
                });
                double neg = window_sum(n, i, [](const ReviewRecord& r) {
                    return r.pos_words < r.neg_words ? oracle_review_tendency(r) : 0.0;
                });
                if (is_undefined(pos) || is_undefined(neg)) return undef();
                return pos + neg;
            }
            case BaseId::Days: {
                double count = window_sum(n, i, [](const ReviewRecord&) { return 1.0; });
                if (is_undefined(count) || count == 0.0) return undef();
                return window_sum(n, i, [](const ReviewRecord& r) { return double(r.days); }) / count;
            }
            case BaseId::Useful:
                return window_sum(n, i, [](const ReviewRecord& r) { return double(r.useful_votes); });
            case BaseId::UsefulR:
                return window_sum(n, i, [](const ReviewRecord& r) { return r.useful_votes > 0 ? 1.0 : 0.0; });
            case BaseId::Useless:
                return window_sum(n, i, [](const ReviewRecord& r) { return double(r.useless_votes); });
            case BaseId::UselessR:
                return window_sum(n, i, [](const ReviewRecord& r) { return r.useless_votes > 0 ? 1.0 : 0.0; });
            case BaseId::Image:
                return window_sum(n, i, [](const ReviewRecord& r) { return double(r.image_count); });
            case BaseId::ImageR:
                return window_sum(n, i, [](const ReviewRecord& r) { return r.image_count > 0 ? 1.0 : 0.0; });
            case BaseId::Reply:
                return window_sum(n, i, [](const ReviewRecord& r) { return double(r.reply_count); });
            case BaseId::ReplyR:
                return window_sum(n, i, [](const ReviewRecord& r) { return r.reply_count > 0 ? 1.0 : 0.0; });
            case BaseId::Client0:
                return window_sum(n, i, [](const ReviewRecord& r) { return r.user_client == Client::Web ? 1.0 : 0.0; });
            case BaseId::Client2:
                return window_sum(n, i, [](const ReviewRecord& r) { return r.user_client == Client::IPhone ? 1.0 : 0.0; });
            case BaseId::Client4:
                return window_sum(n, i, [](const ReviewRecord& r) { return r.user_client == Client::Android ? 1.0 : 0.0; });
            case BaseId::Client21:
                return window_sum(n, i, [](const ReviewRecord& r) { return r.user_client == Client::WeChat ? 1.0 : 0.0; });
            case BaseId::Mobile:
                return window_sum(n, i, [](const ReviewRecord& r) { return r.is_mobile ? 1.0 : 0.0; });
            default: throw validation_error("oracle: bad base id");
        }
    };

    auto reviews_in = [&](int n, std::int32_t i) {
        return window_sum(n, i, [](const ReviewRecord&) { return 1.0; });
    };
    auto divide = [&](double num, double den) -> double {
        if (is_undefined(num) || is_undefined(den) || den == 0.0) return undef();
        return num / den;
    };
    auto average_den = [&](BaseId b, int n, std::int32_t i) -> double {
        if (b == BaseId::TendencyPos) return base(BaseId::TendencyPosR, n, i);
        if (b == BaseId::TendencyNeg) return base(BaseId::TendencyNegR, n, i);
        return reviews_in(n, i);
    };
    auto minus = [](double a, double b) -> double {
        if (is_undefined(a) || is_undefined(b)) return undef();
        return a - b;
    };

    const BaseId b = key.base;
    const int n = key.n, m = key.m;
    const std::int32_t i = week;
    switch (key.variant) {
        case Variant::Base: return base(b, n, i);
        case Variant::Diff: return minus(base(b, n, i), base(b, n, i - 1));
        case Variant::DiffRatio: {
            double prev = base(b, n, i - 1);
            if (is_undefined(prev) || prev == 0.0) return undef();
            return minus(base(b, n, i), prev) / prev;
        }
        case Variant::Ratio: return divide(base(b, n, i), reviews_in(n, i));
        case Variant::RatioDiff:
            return minus(divide(base(b, n, i), reviews_in(n, i)),
                         divide(base(b, n, i - 1), reviews_in(n, i - 1)));
        case Variant::DiffH: return minus(base(b, n, i), base(b, m, i - n));
        case Variant::RatioDiffH:
            return minus(divide(base(b, n, i), reviews_in(n, i)),
                         divide(base(b, m, i - n), reviews_in(m, i - n)));
        case Variant::Average: return divide(base(b, n, i), average_den(b, n, i));
        case Variant::AverageDiff:
            return minus(divide(base(b, n, i), average_den(b, n, i)),
                         divide(base(b, n, i - 1), average_den(b, n, i - 1)));
        case Variant::AverageDiffH:
            return minus(divide(base(b, n, i), average_den(b, n, i)),
                         divide(base(b, m, i - n), average_den(b, m, i - n)));
        case Variant::RatioE: return divide(base(b, n, i), base(BaseId::EmotionAll, n, i));
        case Variant::RatioEDiff:
            return minus(divide(base(b, n, i), base(BaseId::EmotionAll, n, i)),
                         divide(base(b, n, i - 1), base(BaseId::EmotionAll, n, i - 1)));
        case Variant::RatioEDiffH:
            return minus(divide(base(b, n, i), base(BaseId::EmotionAll, n, i)),
                         divide(base(b, m, i - n), base(BaseId::EmotionAll, m, i - n)));
        case Variant::DaysH: {
            // total days in the n-week window minus total days in the prior
            // m-week window
            auto days_total = [&](int nn, std::int32_t ii) {
                return window_sum(nn, ii, [](const ReviewRecord& r) { return double(r.days); });
            };
            return minus(days_total(n, i), days_total(m, i - n));
        }
        default: throw validation_error("oracle: bad variant");
    }
}

// ---------------------------------------------------------------------------
// matrix-level corpus

MatrixCorpus generate_matrix_corpus(const MatrixCorpusSpec& spec) {
    if (spec.signal_firms > spec.n_firms || spec.n_signal_features > spec.n_features)
        throw validation_error("matrix corpus: signal sizes exceed totals");

    const std::int32_t first_week = week_index_of(parse_date("2014-01-06"));

    std::vector<std::string> names;
    for (int j = 0; j < spec.n_features; ++j) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "feat_%04d", j);
        names.emplace_back(buf);
    }

    std::vector<std::pair<std::string, std::int32_t>> rows;
    std::vector<std::string> firm_ids;
    for (int f = 0; f < spec.n_firms; ++f) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "MF%03d", f);
        firm_ids.emplace_back(buf);
    }
    std::sort(firm_ids.begin(), firm_ids.end());
    for (const auto& firm : firm_ids)
        for (int w = 0; w < spec.weeks; ++w) rows.emplace_back(firm, first_week + w);

    MatrixCorpus corpus;
    corpus.features = FeatureMatrix(names, std::move(rows));
    for (int j = 0; j < spec.n_signal_features; ++j)
        corpus.signal_features.push_back(static_cast<std::size_t>(j));

    std::vector<FirmTargets> targets;
    std::vector<WeeklySeries> all_series;
    for (int f = 0; f < spec.n_firms; ++f) {
        const std::string& firm = firm_ids[static_cast<std::size_t>(f)];
        bool carries_signal = f < spec.signal_firms;
        if (carries_signal) corpus.signal_firm_ids.push_back(firm);

        Rng latent_rng(spec.seed, "mx-latent-" + firm);
        Rng price_rng(spec.seed, "mx-price-" + firm);
        Rng noise_rng(spec.seed, "mx-noise-" + firm);

        std::vector<double> z(static_cast<std::size_t>(spec.weeks));
        for (auto& v : z) v = latent_rng.normal();

        auto [lo, hi] = corpus.features.firm_rows(firm);
        for (std::size_t r = lo; r < hi; ++r) {
            std::size_t w = r - lo;
            for (int j = 0; j < spec.n_features; ++j) {
                bool is_signal = carries_signal && j < spec.n_signal_features;
                double v = is_signal ? z[w] + spec.feature_noise * noise_rng.normal()
                                     : noise_rng.normal();
                corpus.features.set(r, static_cast<std::size_t>(j), v);
            }
        }

        auto closes = close_path(z, spec.return_effect, spec.price_noise, spec.memory_weeks, 20.0,
                                 price_rng);
        std::vector<WeeklyBar> bars(closes.size());
        for (std::size_t w = 0; w < closes.size(); ++w) {
            bars[w].firm_id = firm;
            bars[w].week_index = first_week + static_cast<std::int32_t>(w);
            bars[w].open = bars[w].close = bars[w].low = bars[w].high = closes[w];
        }
        all_series.emplace_back(firm, std::move(bars));
    }
    corpus.targets = build_target_panel(all_series);
    return corpus;
}

}  // namespace ralpha
