#include "ralpha/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace ralpha {

using nlohmann::json;

const char* user_level_name(UserLevel level) {
    switch (level) {
        case UserLevel::Ordinary: return "ordinary";
        case UserLevel::Silver: return "silver";
        case UserLevel::Gold: return "gold";
        case UserLevel::Diamond: return "diamond";
    }
    return "?";
}

std::optional<UserLevel> parse_user_level(const std::string& name) {
    if (name == "ordinary") return UserLevel::Ordinary;
    if (name == "silver") return UserLevel::Silver;
    if (name == "gold") return UserLevel::Gold;
    if (name == "diamond") return UserLevel::Diamond;
    return std::nullopt;
}

namespace {

int require_int(const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer())
        throw validation_error("line " + std::to_string(line) + ": missing or non-integer field '" +
                               key + "'");
    return it->get<int>();
}

bool require_bool(const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_boolean())
        throw validation_error("line " + std::to_string(line) + ": missing or non-boolean field '" +
                               key + "'");
    return it->get<bool>();
}

std::string require_string(const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        throw validation_error("line " + std::to_string(line) + ": missing or non-string field '" +
                               key + "'");
    return it->get<std::string>();
}

ReviewRecord parse_review_line(const std::string& text, std::size_t line) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error("line " + std::to_string(line) + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw validation_error("line " + std::to_string(line) + ": not an object");

    ReviewRecord r;
    r.firm_id = require_string(j, "firm_id", line);
    r.product_id = require_string(j, "product_id", line);
    r.review_id = require_string(j, "review_id", line);
    r.posted_at = parse_date(require_string(j, "posted_at", line));
    r.star = require_int(j, "star", line);
    if (r.star < 1 || r.star > 5)
        throw validation_error("line " + std::to_string(line) + ": star=" + std::to_string(r.star) +
                               " outside [1,5]");
    r.is_default = require_bool(j, "is_default", line);
    r.days = require_int(j, "days", line);
    r.useful_votes = require_int(j, "useful_votes", line);
    r.useless_votes = require_int(j, "useless_votes", line);
    r.reply_count = require_int(j, "reply_count", line);
    r.image_count = require_int(j, "image_count", line);
    for (auto [name, value] : {std::pair{"days", r.days},
                               {"useful_votes", r.useful_votes},
                               {"useless_votes", r.useless_votes},
                               {"reply_count", r.reply_count},
                               {"image_count", r.image_count}}) {
        if (value < 0)
            throw validation_error("line " + std::to_string(line) + ": negative " + name);
    }

    int client = require_int(j, "user_client", line);
    switch (client) {
        case 0: r.user_client = Client::Web; break;
        case 2: r.user_client = Client::IPhone; break;
        case 4: r.user_client = Client::Android; break;
        case 21: r.user_client = Client::WeChat; break;
        default:
            throw validation_error("line " + std::to_string(line) +
                                   ": user_client=" + std::to_string(client) +
                                   " not in {0,2,4,21}");
    }
    r.is_mobile = require_bool(j, "is_mobile", line);

    if (auto it = j.find("emotion"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer())
            throw validation_error("line " + std::to_string(line) + ": non-integer emotion");
        int e = it->get<int>();
        if (e < 0 || e >= kNumEmotions)
            throw validation_error("line " + std::to_string(line) + ": emotion=" +
                                   std::to_string(e) + " outside [0,4]");
        r.emotion = e;
    }
    r.pos_words = require_int(j, "pos_words", line);
    r.neg_words = require_int(j, "neg_words", line);
    if (r.pos_words < 0 || r.neg_words < 0)
        throw validation_error("line " + std::to_string(line) + ": negative tendency word count");

    if (auto it = j.find("user_level"); it != j.end() && !it->is_null()) {
        if (!it->is_string())
            throw validation_error("line " + std::to_string(line) + ": non-string user_level");
        auto level = parse_user_level(it->get<std::string>());
        if (!level)
            throw validation_error("line " + std::to_string(line) + ": unknown user_level '" +
                                   it->get<std::string>() + "'");
        r.user_level = level;
    }
    return r;
}

}  // namespace

std::vector<ReviewRecord> load_reviews(std::istream& in, MalformedPolicy policy, LoadStats* stats) {
    std::vector<ReviewRecord> out;
    std::unordered_set<std::string> seen;  // product_id \x1f review_id
    LoadStats local;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ReviewRecord r;
        try {
            r = parse_review_line(line, lineno);
        } catch (const validation_error&) {
            if (policy == MalformedPolicy::Fail) throw;
            ++local.skipped;
            continue;
        }
        ++local.parsed;
        std::string key = r.product_id + '\x1f' + r.review_id;
        if (!seen.insert(std::move(key)).second) {
            ++local.duplicates;  // first occurrence wins
            continue;
        }
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const ReviewRecord& a, const ReviewRecord& b) {
        if (a.firm_id != b.firm_id) return a.firm_id < b.firm_id;
        if (a.posted_at != b.posted_at) return a.posted_at < b.posted_at;
        if (a.product_id != b.product_id) return a.product_id < b.product_id;
        return a.review_id < b.review_id;
    });
    if (stats) *stats = local;
    return out;
}

std::vector<ReviewRecord> load_reviews_file(const std::string& path, MalformedPolicy policy,
                                            LoadStats* stats) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open reviews file: " + path);
    return load_reviews(in, policy, stats);
}

void write_reviews_jsonl(std::ostream& out, const std::vector<ReviewRecord>& reviews) {
    for (const auto& r : reviews) {
        json j;
        j["firm_id"] = r.firm_id;
        j["product_id"] = r.product_id;
        j["review_id"] = r.review_id;
        j["posted_at"] = format_date(r.posted_at);
        j["star"] = r.star;
        j["is_default"] = r.is_default;
        j["days"] = r.days;
        j["useful_votes"] = r.useful_votes;
        j["useless_votes"] = r.useless_votes;
        j["reply_count"] = r.reply_count;
        j["image_count"] = r.image_count;
        j["user_client"] = static_cast<int>(r.user_client);
        j["is_mobile"] = r.is_mobile;
        if (r.emotion)
            j["emotion"] = *r.emotion;
        else
            j["emotion"] = nullptr;
        j["pos_words"] = r.pos_words;
        j["neg_words"] = r.neg_words;
        if (r.user_level)
            j["user_level"] = user_level_name(*r.user_level);
        else
            j["user_level"] = nullptr;
        out << j.dump() << '\n';
    }
}

FirmFilterResult filter_firms(const std::vector<ReviewRecord>& reviews, int min_reviews,
                              int min_span_months) {
    if (min_reviews < 0 || min_span_months < 0)
        throw validation_error("filter_firms thresholds must be non-negative");

    struct Span {
        std::size_t count = 0;
        Date first{INT32_MAX}, last{INT32_MIN};
    };
    std::map<std::string, Span> spans;
    for (const auto& r : reviews) {
        auto& s = spans[r.firm_id];
        ++s.count;
        s.first = std::min(s.first, r.posted_at);
        s.last = std::max(s.last, r.posted_at);
    }

    FirmFilterResult result;
    std::set<std::string> keep;
    for (const auto& [firm, s] : spans) {
        bool enough = s.count >= static_cast<std::size_t>(min_reviews);
        bool long_enough = add_months(s.first, min_span_months) <= s.last;
        if (enough && long_enough) keep.insert(firm);
    }
    result.eligible_firms.assign(keep.begin(), keep.end());
    result.reviews.reserve(reviews.size());
    for (const auto& r : reviews)
        if (keep.count(r.firm_id)) result.reviews.push_back(r);
    return result;
}

std::vector<DailyBar> load_prices(std::istream& in) {
    std::vector<DailyBar> bars;
    std::string line;
    if (!std::getline(in, line)) throw validation_error("prices: empty input");
    // tolerate a UTF-8 BOM and trailing \r
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "firm_id,trade_date,open,high,low,close")
        throw validation_error("prices: unexpected header '" + line + "'");

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string firm, date, o, h, l, c;
        if (!std::getline(ss, firm, ',') || !std::getline(ss, date, ',') ||
            !std::getline(ss, o, ',') || !std::getline(ss, h, ',') || !std::getline(ss, l, ',') ||
            !std::getline(ss, c))
            throw validation_error("prices line " + std::to_string(lineno) + ": expected 6 fields");
        DailyBar bar;
        bar.firm_id = firm;
        bar.trade_date = parse_date(date);
        try {
            bar.open = std::stod(o);
            bar.high = std::stod(h);
            bar.low = std::stod(l);
            bar.close = std::stod(c);
        } catch (const std::exception&) {
            throw validation_error("prices line " + std::to_string(lineno) + ": bad number");
        }
        if (bar.open <= 0 || bar.high <= 0 || bar.low <= 0 || bar.close <= 0)
            throw validation_error("prices line " + std::to_string(lineno) + ": non-positive price for " +
                                   firm + " on " + date);
        if (bar.low > std::min(bar.open, bar.close) || bar.high < std::max(bar.open, bar.close))
            throw validation_error("prices line " + std::to_string(lineno) +
                                   ": low/high inconsistent with open/close for " + firm + " on " +
                                   date);
        bars.push_back(std::move(bar));
    }

    std::stable_sort(bars.begin(), bars.end(), [](const DailyBar& a, const DailyBar& b) {
        if (a.firm_id != b.firm_id) return a.firm_id < b.firm_id;
        return a.trade_date < b.trade_date;
    });
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].firm_id == bars[i - 1].firm_id && bars[i].trade_date == bars[i - 1].trade_date)
            throw validation_error("prices: duplicate trading day for " + bars[i].firm_id + " on " +
                                   format_date(bars[i].trade_date));
    }
    return bars;
}

std::vector<DailyBar> load_prices_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open prices file: " + path);
    return load_prices(in);
}

void write_prices_csv(std::ostream& out, const std::vector<DailyBar>& bars) {
    out << "firm_id,trade_date,open,high,low,close\n";
    char buf[128];
    for (const auto& b : bars) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f", b.open, b.high, b.low, b.close);
        out << b.firm_id << ',' << format_date(b.trade_date) << ',' << buf << '\n';
    }
}

}  // namespace ralpha
