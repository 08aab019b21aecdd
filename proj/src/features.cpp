#include "ralpha/features.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace ralpha {

const char* category_name(Category c) {
    static const char* names[] = {"Review", "Star",  "Default", "Score", "Emotion", "Tendency",
                                  "Days",   "Useful", "Useless", "Image", "Reply",  "Client",
                                  "Mobile"};
    return names[static_cast<int>(c)];
}

const char* base_label(BaseId b) {
    static const char* labels[] = {
        "Review",
        "Star^1", "Star^2", "Star^3", "Star^4", "Star^5", "Star^15",
        "Default",
        "Score",
        "Emotion^0", "Emotion^1", "Emotion^2", "Emotion^3", "Emotion^4",
        "Emotion", "Emotion^negative",
        "Tendency^posW", "Tendency^negW", "Tendency^word",
        "Tendency^posR", "Tendency^negR", "Tendency^pos", "Tendency^neg", "Tendency",
        "Days",
        "Useful", "UsefulR", "Useless", "UselessR",
        "Image", "ImageR", "Reply", "ReplyR",
        "Client^0", "Client^2", "Client^4", "Client^21",
        "Mobile"};
    return labels[static_cast<int>(b)];
}

Category base_category(BaseId b) {
    switch (b) {
        case BaseId::Review: return Category::Review;
        case BaseId::Star1:
        case BaseId::Star2:
        case BaseId::Star3:
        case BaseId::Star4:
        case BaseId::Star5:
        case BaseId::Star15: return Category::Star;
        case BaseId::Default: return Category::Default;
        case BaseId::Score: return Category::Score;
        case BaseId::Emotion0:
        case BaseId::Emotion1:
        case BaseId::Emotion2:
        case BaseId::Emotion3:
        case BaseId::Emotion4:
        case BaseId::EmotionAll:
        case BaseId::EmotionNegative: return Category::Emotion;
        case BaseId::TendencyPosW:
        case BaseId::TendencyNegW:
        case BaseId::TendencyWord:
        case BaseId::TendencyPosR:
        case BaseId::TendencyNegR:
        case BaseId::TendencyPos:
        case BaseId::TendencyNeg:
        case BaseId::TendencyAll: return Category::Tendency;
        case BaseId::Days: return Category::Days;
        case BaseId::Useful:
        case BaseId::UsefulR: return Category::Useful;
        case BaseId::Useless:
        case BaseId::UselessR: return Category::Useless;
        case BaseId::Image:
        case BaseId::ImageR: return Category::Image;
        case BaseId::Reply:
        case BaseId::ReplyR: return Category::Reply;
        case BaseId::Client0:
        case BaseId::Client2:
        case BaseId::Client4:
        case BaseId::Client21: return Category::Client;
        case BaseId::Mobile: return Category::Mobile;
        default: throw validation_error("bad base id");
    }
}

const char* variant_suffix(Variant v) {
    static const char* suffixes[] = {"",          "Diff",        "DiffRatio",   "Ratio",
                                     "RatioDiff", "DiffH",       "RatioDiffH",  "Average",
                                     "AverageDiff", "AverageDiffH", "RatioE",   "RatioEDiff",
                                     "RatioEDiffH", "H"};
    return suffixes[static_cast<int>(v)];
}

bool variant_uses_history(Variant v) {
    switch (v) {
        case Variant::DiffH:
        case Variant::RatioDiffH:
        case Variant::AverageDiffH:
        case Variant::RatioEDiffH:
        case Variant::DaysH: return true;
        default: return false;
    }
}

std::vector<Variant> admissible_variants(BaseId b) {
    using V = Variant;
    static const std::vector<V> count_full = {V::Base,      V::Diff,  V::DiffRatio, V::Ratio,
                                              V::RatioDiff, V::DiffH, V::RatioDiffH};
    static const std::vector<V> sum_avg = {V::Base,        V::Diff,  V::DiffRatio, V::Average,
                                           V::AverageDiff, V::DiffH, V::AverageDiffH};
    static const std::vector<V> series_only = {V::Base, V::Diff, V::DiffRatio, V::DiffH};
    switch (b) {
        case BaseId::Review: return series_only;
        case BaseId::Star1:
        case BaseId::Star2:
        case BaseId::Star3:
        case BaseId::Star4:
        case BaseId::Star5: return count_full;
        case BaseId::Star15:
            // its Base already carries the "Diff" render; no history variants
            return {V::Base, V::DiffRatio, V::Ratio, V::RatioDiff};
        case BaseId::Default: return count_full;
        case BaseId::Score: return series_only;
        case BaseId::Emotion0:
        case BaseId::Emotion1:
        case BaseId::Emotion2:
        case BaseId::Emotion3:
        case BaseId::Emotion4:
        case BaseId::EmotionNegative:
            return {V::Base,      V::Diff,  V::DiffRatio,  V::Ratio,  V::RatioDiff,
                    V::DiffH,     V::RatioDiffH, V::RatioE, V::RatioEDiff, V::RatioEDiffH};
        case BaseId::EmotionAll: return count_full;
        case BaseId::TendencyPosW:
        case BaseId::TendencyNegW: return sum_avg;
        case BaseId::TendencyWord: return {V::Base, V::Diff, V::DiffH};
        case BaseId::TendencyPosR:
        case BaseId::TendencyNegR: return count_full;
        case BaseId::TendencyPos:
        case BaseId::TendencyNeg: return sum_avg;
        case BaseId::TendencyAll: return series_only;
        case BaseId::Days:
            return {V::Base, V::Diff, V::DiffRatio, V::DaysH, V::DiffH};
        case BaseId::Useful:
        case BaseId::Useless:
        case BaseId::Image:
        case BaseId::Reply: return sum_avg;
        case BaseId::UsefulR:
        case BaseId::UselessR:
        case BaseId::ImageR:
        case BaseId::ReplyR: return count_full;
        case BaseId::Client0:
        case BaseId::Client2:
        case BaseId::Client4:
        case BaseId::Client21: return count_full;
        case BaseId::Mobile: return count_full;
        default: throw validation_error("bad base id");
    }
}

std::string FeatureKey::name() const {
    std::string s = "W" + std::to_string(n) + base_label(base);
    if (base == BaseId::Star15 && variant == Variant::Base)
        s += "Diff";
    else
        s += variant_suffix(variant);
    if (variant_uses_history(variant)) s += std::to_string(m);
    return s;
}

void validate_key(const FeatureKey& key) {
    if (key.n < 1 || key.n > 12)
        throw validation_error("feature window n=" + std::to_string(key.n) + " outside [1,12]");
    auto vs = admissible_variants(key.base);
    if (std::find(vs.begin(), vs.end(), key.variant) == vs.end())
        throw validation_error("variant not admissible for base " +
                               std::string(base_label(key.base)));
    if (variant_uses_history(key.variant)) {
        if (key.m <= key.n)
            throw validation_error("history window m=" + std::to_string(key.m) +
                                   " must exceed n=" + std::to_string(key.n));
    } else if (key.m != 0) {
        throw validation_error("variant " + std::string(variant_suffix(key.variant)) +
                               " takes no history window");
    }
}

std::vector<FeatureKey> enumerate_catalog(const std::vector<WindowSpec>& specs) {
    for (const auto& s : specs) {
        if (s.n < 1 || s.n > 12)
            throw validation_error("window spec n=" + std::to_string(s.n) + " outside [1,12]");
        for (int m : s.history)
            if (m <= s.n)
                throw validation_error("window spec m=" + std::to_string(m) + " must exceed n=" +
                                       std::to_string(s.n));
    }
    std::vector<FeatureKey> catalog;
    for (int b = 0; b < static_cast<int>(BaseId::kNumBases); ++b) {
        BaseId base = static_cast<BaseId>(b);
        for (Variant v : admissible_variants(base)) {
            for (const auto& spec : specs) {
                if (variant_uses_history(v)) {
                    for (int m : spec.history) catalog.push_back({base, v, spec.n, m});
                } else {
                    catalog.push_back({base, v, spec.n, 0});
                }
            }
        }
    }
    // catalog order: (category, base, variant, n, m); bases are declared in
    // category order and specs arrive n-ascending, so a stable sort on the
    // remaining keys keeps everything deterministic even for custom specs.
    std::stable_sort(catalog.begin(), catalog.end(), [](const FeatureKey& a, const FeatureKey& b2) {
        if (a.category() != b2.category())
            return static_cast<int>(a.category()) < static_cast<int>(b2.category());
        if (a.base != b2.base) return static_cast<int>(a.base) < static_cast<int>(b2.base);
        if (a.variant != b2.variant) return static_cast<int>(a.variant) < static_cast<int>(b2.variant);
        if (a.n != b2.n) return a.n < b2.n;
        return a.m < b2.m;
    });
    return catalog;
}

namespace {

// base statistic over the trailing n-week window ending at week i
double base_value(const FirmPanel& p, BaseId b, int n, std::int32_t i) {
    auto ws = [&](Counter c) { return p.window_sum(c, n, i); };
    switch (b) {
        case BaseId::Review: return ws(kReviewCount);
        case BaseId::Star1: return ws(kStar1);
        case BaseId::Star2: return ws(kStar2);
        case BaseId::Star3: return ws(kStar3);
        case BaseId::Star4: return ws(kStar4);
        case BaseId::Star5: return ws(kStar5);
        case BaseId::Star15: return ws(kStar5) - ws(kStar1);
        case BaseId::Default: return ws(kDefaultCount);
        case BaseId::Score: {
            double review = ws(kReviewCount);
            if (is_undefined(review) || review == 0.0) return undef();
            double total = 0.0;
            for (int s = 0; s < 5; ++s)
                total += (s + 1) * ws(static_cast<Counter>(kStar1 + s));
            return total / review;
        }
        case BaseId::Emotion0: return ws(kEmotion0);
        case BaseId::Emotion1: return ws(kEmotion1);
        case BaseId::Emotion2: return ws(kEmotion2);
        case BaseId::Emotion3: return ws(kEmotion3);
        case BaseId::Emotion4: return ws(kEmotion4);
        case BaseId::EmotionAll: return ws(kEmotionalCount);
        case BaseId::EmotionNegative: return ws(kNegEmotionCount);
        case BaseId::TendencyPosW: return ws(kPosWordsSum);
        case BaseId::TendencyNegW: return ws(kNegWordsSum);
        case BaseId::TendencyWord: {
            double pos = ws(kPosWordsSum), neg = ws(kNegWordsSum);
            if (is_undefined(pos) || is_undefined(neg) || pos + neg == 0.0) return undef();
            return (pos - neg) / (pos + neg);
        }
        case BaseId::TendencyPosR: return ws(kPosReviewCount);
        case BaseId::TendencyNegR: return ws(kNegReviewCount);
        case BaseId::TendencyPos: return ws(kPosTendencySum);
        case BaseId::TendencyNeg: return ws(kNegTendencySum);
        case BaseId::TendencyAll: {
            double pos = ws(kPosTendencySum), neg = ws(kNegTendencySum);
            if (is_undefined(pos) || is_undefined(neg)) return undef();
            return pos + neg;
        }
        case BaseId::Days: {
            double review = ws(kReviewCount);
            if (is_undefined(review) || review == 0.0) return undef();
            return ws(kDaysSum) / review;
        }
        case BaseId::Useful: return ws(kUsefulSum);
        case BaseId::UsefulR: return ws(kUsefulRCount);
        case BaseId::Useless: return ws(kUselessSum);
        case BaseId::UselessR: return ws(kUselessRCount);
        case BaseId::Image: return ws(kImageSum);
        case BaseId::ImageR: return ws(kImageRCount);
        case BaseId::Reply: return ws(kReplySum);
        case BaseId::ReplyR: return ws(kReplyRCount);
        case BaseId::Client0: return ws(kClientWeb);
        case BaseId::Client2: return ws(kClientIPhone);
        case BaseId::Client4: return ws(kClientAndroid);
        case BaseId::Client21: return ws(kClientWeChat);
        case BaseId::Mobile: return ws(kMobileCount);
        default: throw validation_error("bad base id");
    }
}

// denominator counter for the Average variant of a given base
Counter average_denominator(BaseId b) {
    switch (b) {
        case BaseId::TendencyPos: return kPosReviewCount;
        case BaseId::TendencyNeg: return kNegReviewCount;
        default: return kReviewCount;
    }
}

// x / denominator-window, undefined on zero or out-of-range windows
double over_window(const FirmPanel& p, BaseId b, Counter den_counter, int n, std::int32_t i) {
    double num = base_value(p, b, n, i);
    double den = p.window_sum(den_counter, n, i);
    if (is_undefined(num) || is_undefined(den) || den == 0.0) return undef();
    return num / den;
}

}  // namespace

double feature_value(const FirmPanel& p, const FeatureKey& key, std::int32_t i) {
    const int n = key.n, m = key.m;
    switch (key.variant) {
        case Variant::Base: return base_value(p, key.base, n, i);
        case Variant::Diff: {
            double cur = base_value(p, key.base, n, i);
            double prev = base_value(p, key.base, n, i - 1);
            if (is_undefined(cur) || is_undefined(prev)) return undef();
            return cur - prev;
        }
        case Variant::DiffRatio: {
            double cur = base_value(p, key.base, n, i);
            double prev = base_value(p, key.base, n, i - 1);
            if (is_undefined(cur) || is_undefined(prev) || prev == 0.0) return undef();
            return (cur - prev) / prev;
        }
        case Variant::Ratio: return over_window(p, key.base, kReviewCount, n, i);
        case Variant::RatioDiff: {
            double cur = over_window(p, key.base, kReviewCount, n, i);
            double prev = over_window(p, key.base, kReviewCount, n, i - 1);
            if (is_undefined(cur) || is_undefined(prev)) return undef();
            return cur - prev;
        }
        case Variant::DiffH: {
            double cur = base_value(p, key.base, n, i);
            double hist = base_value(p, key.base, m, i - n);
            if (is_undefined(cur) || is_undefined(hist)) return undef();
            return cur - hist;
        }
        case Variant::RatioDiffH: {
            double cur = over_window(p, key.base, kReviewCount, n, i);
            double hist = over_window(p, key.base, kReviewCount, m, i - n);
            if (is_undefined(cur) || is_undefined(hist)) return undef();
            return cur - hist;
        }
        case Variant::Average: return over_window(p, key.base, average_denominator(key.base), n, i);
        case Variant::AverageDiff: {
            Counter den = average_denominator(key.base);
            double cur = over_window(p, key.base, den, n, i);
            double prev = over_window(p, key.base, den, n, i - 1);
            if (is_undefined(cur) || is_undefined(prev)) return undef();
            return cur - prev;
        }
        case Variant::AverageDiffH: {
            Counter den = average_denominator(key.base);
            double cur = over_window(p, key.base, den, n, i);
            double hist = over_window(p, key.base, den, m, i - n);
            if (is_undefined(cur) || is_undefined(hist)) return undef();
            return cur - hist;
        }
        case Variant::RatioE: return over_window(p, key.base, kEmotionalCount, n, i);
        case Variant::RatioEDiff: {
            double cur = over_window(p, key.base, kEmotionalCount, n, i);
            double prev = over_window(p, key.base, kEmotionalCount, n, i - 1);
            if (is_undefined(cur) || is_undefined(prev)) return undef();
            return cur - prev;
        }
        case Variant::RatioEDiffH: {
            double cur = over_window(p, key.base, kEmotionalCount, n, i);
            double hist = over_window(p, key.base, kEmotionalCount, m, i - n);
            if (is_undefined(cur) || is_undefined(hist)) return undef();
            return cur - hist;
        }
        case Variant::DaysH: {
            // W_nDays * W_nReview collapses back to the raw days sum
            double cur = p.window_sum(kDaysSum, n, i);
            double hist = p.window_sum(kDaysSum, m, i - n);
            if (is_undefined(cur) || is_undefined(hist)) return undef();
            return cur - hist;
        }
        default: throw validation_error("bad variant");
    }
}

FeatureMatrix::FeatureMatrix(std::vector<FeatureKey> catalog,
                             std::vector<std::pair<std::string, std::int32_t>> rows)
    : catalog_(std::move(catalog)), rows_(std::move(rows)) {
    names_.reserve(catalog_.size());
    for (const auto& key : catalog_) names_.push_back(key.name());
    values_.assign(rows_.size() * names_.size(), undef());
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> names,
                             std::vector<std::pair<std::string, std::int32_t>> rows)
    : names_(std::move(names)), rows_(std::move(rows)) {
    values_.assign(rows_.size() * names_.size(), undef());
}

std::pair<std::size_t, std::size_t> FeatureMatrix::firm_rows(const std::string& firm_id) const {
    auto lo = std::lower_bound(rows_.begin(), rows_.end(), firm_id,
                               [](const auto& row, const std::string& f) { return row.first < f; });
    auto hi = std::upper_bound(rows_.begin(), rows_.end(), firm_id,
                               [](const std::string& f, const auto& row) { return f < row.first; });
    return {static_cast<std::size_t>(lo - rows_.begin()), static_cast<std::size_t>(hi - rows_.begin())};
}

std::size_t FeatureMatrix::find_row(const std::string& firm_id, std::int32_t week) const {
    auto [lo, hi] = firm_rows(firm_id);
    if (lo >= hi) return npos;
    std::int32_t first = rows_[lo].second;
    if (week < first || week >= first + static_cast<std::int32_t>(hi - lo)) return npos;
    return lo + static_cast<std::size_t>(week - first);
}

FeatureMatrix compute_features(const Panel& panel, const std::vector<FeatureKey>& catalog,
                               int threads) {
    for (const auto& key : catalog) validate_key(key);

    std::vector<std::pair<std::string, std::int32_t>> rows;
    for (const auto& firm : panel.firms())
        for (std::int32_t w = firm.first_week(); w <= firm.last_week(); ++w)
            rows.emplace_back(firm.firm_id(), w);

    FeatureMatrix matrix(catalog, std::move(rows));

    // column-block parallelism over the immutable panel; each task owns a
    // disjoint slice of every row, so scheduling cannot change the result
    const std::size_t cols = matrix.num_cols();
    parallel_for(cols, threads, [&](std::size_t j) {
        const FeatureKey& key = matrix.catalog()[j];
        std::size_t row = 0;
        for (const auto& firm : panel.firms()) {
            for (std::int32_t w = firm.first_week(); w <= firm.last_week(); ++w, ++row)
                matrix.set(row, j, feature_value(firm, key, w));
        }
    });
    return matrix;
}

FeatureMatrix shift_features(const FeatureMatrix& matrix, int s) {
    if (s < 1 || s > 12)
        throw validation_error("feature shift s=" + std::to_string(s) + " outside [1,12]");
    std::vector<std::pair<std::string, std::int32_t>> rows;
    std::vector<std::size_t> src;
    for (std::size_t r = 0; r < matrix.num_rows(); ++r) {
        const auto& [firm, week] = matrix.rows()[r];
        std::size_t source = matrix.find_row(firm, week - s);
        if (source == FeatureMatrix::npos) continue;
        rows.emplace_back(firm, week);
        src.push_back(source);
    }
    FeatureMatrix shifted = matrix.catalog().empty()
                                ? FeatureMatrix(matrix.names(), std::move(rows))
                                : FeatureMatrix(matrix.catalog(), std::move(rows));
    for (std::size_t r = 0; r < shifted.num_rows(); ++r)
        for (std::size_t c = 0; c < matrix.num_cols(); ++c)
            shifted.set(r, c, matrix.at(src[r], c));
    return shifted;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& matrix) {
    out << "firm_id,week_index";
    for (const auto& name : matrix.names()) out << ',' << name;
    out << '\n';
    char buf[64];
    for (std::size_t r = 0; r < matrix.num_rows(); ++r) {
        out << matrix.rows()[r].first << ',' << matrix.rows()[r].second;
        for (std::size_t c = 0; c < matrix.num_cols(); ++c) {
            double v = matrix.at(r, c);
            if (is_undefined(v)) {
                out << ",";
            } else {
                std::snprintf(buf, sizeof buf, "%.12g", v);
                out << ',' << buf;
            }
        }
        out << '\n';
    }
}

void write_catalog_manifest(std::ostream& out, const std::vector<FeatureKey>& catalog) {
    out << "index,name,category,base,variant,n,m\n";
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const auto& k = catalog[i];
        out << i << ',' << k.name() << ',' << category_name(k.category()) << ','
            << base_label(k.base) << ',' << variant_suffix(k.variant) << ',' << k.n << ','
            << (variant_uses_history(k.variant) ? std::to_string(k.m) : std::string()) << '\n';
    }
}

}  // namespace ralpha
