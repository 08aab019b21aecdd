#include "ralpha/panel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace ralpha {

const char* counter_name(Counter c) {
    static const char* names[kNumCounters] = {
        "review_count", "star1",        "star2",        "star3",        "star4",
        "star5",        "default_count", "emotion0",     "emotion1",     "emotion2",
        "emotion3",     "emotion4",     "emotional",    "neg_emotion",  "pos_words",
        "neg_words",    "pos_reviews",  "neg_reviews",  "pos_tendency", "neg_tendency",
        "days_sum",     "useful_sum",   "useful_r",     "useless_sum",  "useless_r",
        "image_sum",    "image_r",      "reply_sum",    "reply_r",      "client_web",
        "client_iphone", "client_android", "client_wechat", "mobile"};
    return names[c];
}

double review_tendency(int pos_words, int neg_words) {
    int total = pos_words + neg_words;
    if (total == 0) return 0.0;
    double ten = static_cast<double>(pos_words - neg_words) / total;
    // snapped to the 2^-20 grid: every window sum of tendencies is then an
    // integer multiple of 2^-20 and exactly representable, so summation
    // order can never flip a zero-denominator test
    return std::round(ten * 1048576.0) / 1048576.0;
}

void accumulate_review(WeekCounters& c, const ReviewRecord& r) {
    c[kReviewCount] += 1;
    c[kStar1 + (r.star - 1)] += 1;
    if (r.is_default) c[kDefaultCount] += 1;
    if (r.emotion) {
        c[kEmotion0 + *r.emotion] += 1;
        c[kEmotionalCount] += 1;
        if (*r.emotion != kEmotionJoy) c[kNegEmotionCount] += 1;
    }
    c[kPosWordsSum] += r.pos_words;
    c[kNegWordsSum] += r.neg_words;
    double ten = review_tendency(r.pos_words, r.neg_words);
    if (r.pos_words > r.neg_words) {
        c[kPosReviewCount] += 1;
        c[kPosTendencySum] += ten;
    } else if (r.pos_words < r.neg_words) {
        c[kNegReviewCount] += 1;
        c[kNegTendencySum] += ten;
    }
    c[kDaysSum] += r.days;
    c[kUsefulSum] += r.useful_votes;
    if (r.useful_votes > 0) c[kUsefulRCount] += 1;
    c[kUselessSum] += r.useless_votes;
    if (r.useless_votes > 0) c[kUselessRCount] += 1;
    c[kImageSum] += r.image_count;
    if (r.image_count > 0) c[kImageRCount] += 1;
    c[kReplySum] += r.reply_count;
    if (r.reply_count > 0) c[kReplyRCount] += 1;
    switch (r.user_client) {
        case Client::Web: c[kClientWeb] += 1; break;
        case Client::IPhone: c[kClientIPhone] += 1; break;
        case Client::Android: c[kClientAndroid] += 1; break;
        case Client::WeChat: c[kClientWeChat] += 1; break;
    }
    if (r.is_mobile) c[kMobileCount] += 1;
}

FirmPanel::FirmPanel(std::string firm_id, std::int32_t first_week,
                     std::vector<WeekCounters> weekly)
    : firm_id_(std::move(firm_id)), first_week_(first_week), weekly_(std::move(weekly)) {
    prefix_.resize(weekly_.size() + 1);
    prefix_[0].fill(0.0);
    for (std::size_t k = 0; k < weekly_.size(); ++k)
        for (int c = 0; c < kNumCounters; ++c) prefix_[k + 1][c] = prefix_[k][c] + weekly_[k][c];
}

const WeekCounters& FirmPanel::week(std::int32_t week_index) const {
    if (!contains_week(week_index))
        throw validation_error("week " + std::to_string(week_index) + " outside panel for " +
                               firm_id_);
    return weekly_[static_cast<std::size_t>(week_index - first_week_)];
}

double FirmPanel::window_sum(Counter c, int n, std::int32_t i) const {
    if (n < 1) throw validation_error("window length must be >= 1");
    if (i > last_week() || i - n + 1 < first_week_) return undef();
    std::size_t hi = static_cast<std::size_t>(i - first_week_) + 1;
    std::size_t lo = hi - static_cast<std::size_t>(n);
    return prefix_[hi][c] - prefix_[lo][c];
}

std::vector<WindowSpec> default_window_specs() {
    static const int kHistory[] = {4, 6, 8, 10, 12, 16, 20, 24};
    std::vector<WindowSpec> specs;
    for (int n = 1; n <= 12; ++n) {
        WindowSpec s;
        s.n = n;
        for (int m : kHistory)
            if (m > n) s.history.push_back(m);
        specs.push_back(std::move(s));
    }
    return specs;
}

Panel::Panel(std::vector<FirmPanel> firms) : firms_(std::move(firms)) {
    std::sort(firms_.begin(), firms_.end(),
              [](const FirmPanel& a, const FirmPanel& b) { return a.firm_id() < b.firm_id(); });
    for (std::size_t i = 0; i < firms_.size(); ++i) by_firm_[firms_[i].firm_id()] = i;
}

const FirmPanel* Panel::find(const std::string& firm_id) const {
    auto it = by_firm_.find(firm_id);
    return it == by_firm_.end() ? nullptr : &firms_[it->second];
}

const FirmPanel& Panel::at(const std::string& firm_id) const {
    const FirmPanel* p = find(firm_id);
    if (!p) throw validation_error("no panel for firm " + firm_id);
    return *p;
}

Panel build_weekly_aggregates(const std::vector<ReviewRecord>& reviews) {
    std::map<std::string, std::pair<std::int32_t, std::int32_t>> spans;  // firm -> [first, last] week
    for (const auto& r : reviews) {
        std::int32_t w = week_index_of(r.posted_at);
        auto [it, inserted] = spans.try_emplace(r.firm_id, w, w);
        if (!inserted) {
            it->second.first = std::min(it->second.first, w);
            it->second.second = std::max(it->second.second, w);
        }
    }

    std::map<std::string, std::vector<WeekCounters>> weekly;
    for (const auto& [firm, span] : spans) {
        std::size_t n = static_cast<std::size_t>(span.second - span.first) + 1;
        weekly[firm].assign(n, WeekCounters{});
    }
    for (const auto& r : reviews) {
        std::int32_t w = week_index_of(r.posted_at);
        auto& series = weekly[r.firm_id];
        accumulate_review(series[static_cast<std::size_t>(w - spans[r.firm_id].first)], r);
    }

    std::vector<FirmPanel> firms;
    firms.reserve(weekly.size());
    for (auto& [firm, series] : weekly)
        firms.emplace_back(firm, spans[firm].first, std::move(series));
    return Panel(std::move(firms));
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
    out << "firm_id,week_index,week_monday";
    for (int c = 0; c < kNumCounters; ++c) out << ',' << counter_name(static_cast<Counter>(c));
    out << '\n';
    for (const auto& firm : panel.firms()) {
        for (std::int32_t w = firm.first_week(); w <= firm.last_week(); ++w) {
            out << firm.firm_id() << ',' << w << ',' << format_date(week_monday(w));
            const auto& counts = firm.week(w);
            for (int c = 0; c < kNumCounters; ++c) out << ',' << counts[c];
            out << '\n';
        }
    }
}

}  // namespace ralpha
