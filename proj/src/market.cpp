#include "ralpha/market.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace ralpha {

WeeklySeries::WeeklySeries(std::string firm_id, std::vector<WeeklyBar> bars)
    : firm_id_(std::move(firm_id)), bars_(std::move(bars)) {
    for (std::size_t i = 0; i < bars_.size(); ++i) {
        if (i > 0 && bars_[i].week_index <= bars_[i - 1].week_index)
            throw validation_error("weekly bars not strictly increasing for " + firm_id_);
        week_to_pos_[bars_[i].week_index] = i;
    }
}

std::size_t WeeklySeries::position_of_week(std::int32_t w) const {
    auto it = week_to_pos_.find(w);
    return it == week_to_pos_.end() ? npos : it->second;
}

std::vector<WeeklySeries> weekly_bars(const std::vector<DailyBar>& daily) {
    std::vector<WeeklySeries> out;
    std::size_t i = 0;
    while (i < daily.size()) {
        const std::string& firm = daily[i].firm_id;
        std::vector<WeeklyBar> bars;
        while (i < daily.size() && daily[i].firm_id == firm) {
            std::int32_t w = week_index_of(daily[i].trade_date);
            if (bars.empty() || bars.back().week_index != w) {
                WeeklyBar bar;
                bar.firm_id = firm;
                bar.week_index = w;
                bar.open = daily[i].open;
                bar.close = daily[i].close;
                bar.low = daily[i].low;
                bar.high = daily[i].high;
                bars.push_back(bar);
            } else {
                WeeklyBar& bar = bars.back();
                bar.close = daily[i].close;  // last trading day wins
                bar.low = std::min(bar.low, daily[i].low);
                bar.high = std::max(bar.high, daily[i].high);
            }
            ++i;
        }
        out.emplace_back(firm, std::move(bars));
    }
    return out;
}

std::vector<double> weekly_returns(const WeeklySeries& series, int horizon) {
    if (horizon < 1 || horizon > 12)
        throw validation_error("return horizon " + std::to_string(horizon) + " outside [1,12]");
    std::vector<double> rw(series.size(), undef());
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::size_t fwd = series.position_of_week(series.bars()[i].week_index + horizon);
        if (fwd == WeeklySeries::npos) continue;
        double base = series.bars()[i].close;
        rw[i] = (series.bars()[fwd].close - base) / base;
    }
    return rw;
}

std::vector<LabeledSample> labeled_samples(const std::vector<WeeklySeries>& weekly, int horizon,
                                           double cutoff) {
    std::vector<LabeledSample> samples;
    for (const auto& series : weekly) {
        auto rw = weekly_returns(series, horizon);
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (is_undefined(rw[i])) continue;
            samples.push_back({series.firm_id(), series.bars()[i].week_index, rw[i],
                               label(rw[i], cutoff)});
        }
    }
    return samples;
}

std::vector<LabeledSample> tau_filter(const std::vector<LabeledSample>& samples, double tau) {
    if (tau < 0.0 || tau > 0.1)
        throw validation_error("tau outside [0, 0.1]");
    std::vector<LabeledSample> kept;
    for (const auto& s : samples) {
        if (s.rw > tau) {
            kept.push_back(s);
            kept.back().label = 1;
        } else if (s.rw < -tau) {
            kept.push_back(s);
            kept.back().label = 0;
        }
    }
    return kept;
}

// ---------------------------------------------------------------------------
// indicators

const std::array<const char*, 10>& IndicatorVector::names() {
    static const std::array<const char*, 10> n = {"sma10", "wma10",      "momentum", "stoch_k",
                                                  "stoch_d", "rsi",      "macd",     "williams_r",
                                                  "ad_osc",  "cci"};
    return n;
}

bool indicators_defined(const IndicatorVector& v) { return !is_undefined(v.sma10); }

namespace {

struct HighLow {
    double hh, ll;
};

// highest high / lowest low over the n bars ending at t
HighLow window_extremes(const std::vector<WeeklyBar>& bars, std::size_t t, int n) {
    HighLow e{bars[t].high, bars[t].low};
    for (std::size_t j = t + 1 - static_cast<std::size_t>(n); j < t; ++j) {
        e.hh = std::max(e.hh, bars[j].high);
        e.ll = std::min(e.ll, bars[j].low);
    }
    return e;
}

double stochastic_k(const std::vector<WeeklyBar>& bars, std::size_t t, int n) {
    HighLow e = window_extremes(bars, t, n);
    if (e.hh == e.ll) return 50.0;
    return (bars[t].close - e.ll) / (e.hh - e.ll) * 100.0;
}

}  // namespace

IndicatorVector technical_indicators(const WeeklySeries& series, std::size_t t, int n) {
    if (n < 2) throw validation_error("indicator period must be >= 2");
    const auto& bars = series.bars();
    if (t >= bars.size()) throw validation_error("indicator position out of range");

    IndicatorVector v;
    if (t < static_cast<std::size_t>(26 + n)) {
        v.sma10 = v.wma10 = v.momentum = v.stoch_k = v.stoch_d = v.rsi = v.macd = v.williams_r =
            v.ad_osc = v.cci = undef();
        return v;
    }

    auto C = [&](std::size_t j) { return bars[j].close; };

    double sma = 0.0, wma = 0.0, wsum = 0.0;
    for (int j = 0; j < n; ++j) {
        double c = C(t - static_cast<std::size_t>(j));
        sma += c;
        wma += (n - j) * c;
        wsum += n - j;
    }
    v.sma10 = sma / n;
    v.wma10 = wma / wsum;

    v.momentum = C(t) - C(t - static_cast<std::size_t>(n - 1));

    v.stoch_k = stochastic_k(bars, t, n);
    double dsum = 0.0;
    for (int j = 0; j < n; ++j) dsum += stochastic_k(bars, t - static_cast<std::size_t>(j), n);
    v.stoch_d = dsum / n;

    double up = 0.0, dw = 0.0;
    for (int j = 0; j < n; ++j) {
        std::size_t k = t - static_cast<std::size_t>(j);
        double change = C(k) - C(k - 1);
        if (change > 0)
            up += change;
        else
            dw -= change;
    }
    if (up == 0.0 && dw == 0.0)
        v.rsi = 50.0;
    else if (dw == 0.0)
        v.rsi = 100.0;
    else if (up == 0.0)
        v.rsi = 0.0;
    else
        v.rsi = 100.0 - 100.0 / (1.0 + (up / n) / (dw / n));

    // EMA(12)/EMA(26) seeded with the first close; the MACD signal line is
    // seeded at 0 and smoothed with period 9
    double ema12 = C(0), ema26 = C(0), macd = 0.0;
    const double a12 = 2.0 / 13.0, a26 = 2.0 / 27.0, a9 = 2.0 / 10.0;
    for (std::size_t j = 1; j <= t; ++j) {
        ema12 += a12 * (C(j) - ema12);
        ema26 += a26 * (C(j) - ema26);
        macd += a9 * ((ema12 - ema26) - macd);
    }
    v.macd = macd;

    HighLow e = window_extremes(bars, t, n);
    v.williams_r = e.hh == e.ll ? 50.0 : (e.hh - C(t)) / (e.hh - e.ll) * 100.0;

    v.ad_osc = bars[t].high == bars[t].low
                   ? undef()
                   : (bars[t].high - C(t - 1)) / (bars[t].high - bars[t].low);

    auto typical = [&](std::size_t j) { return (bars[j].high + bars[j].low + C(j)) / 3.0; };
    double sm = 0.0;
    for (int j = 0; j < n; ++j) sm += typical(t - static_cast<std::size_t>(j));
    sm /= n;
    double dev = 0.0;
    for (int j = 0; j < n; ++j) dev += std::abs(typical(t - static_cast<std::size_t>(j)) - sm);
    dev /= n;
    v.cci = dev == 0.0 ? 0.0 : (typical(t) - sm) / (0.015 * dev);

    return v;
}

void write_indicators_csv(std::ostream& out, const std::vector<WeeklySeries>& weekly, int n) {
    out << "firm_id,week_index";
    for (const char* name : IndicatorVector::names()) out << ',' << name;
    out << '\n';
    char buf[64];
    for (const auto& series : weekly) {
        for (std::size_t t = 0; t < series.size(); ++t) {
            IndicatorVector v = technical_indicators(series, t, n);
            if (!indicators_defined(v)) continue;
            out << series.firm_id() << ',' << series.bars()[t].week_index;
            for (double x : v.as_array()) {
                if (is_undefined(x)) {
                    out << ',';
                } else {
                    std::snprintf(buf, sizeof buf, "%.12g", x);
                    out << ',' << buf;
                }
            }
            out << '\n';
        }
    }
}

void write_targets_csv(std::ostream& out, const std::vector<WeeklySeries>& weekly, double cutoff) {
    out << "firm_id,week_index";
    for (int h = 1; h <= 12; ++h) out << ",rw_" << h;
    out << ",label\n";
    char buf[64];
    for (const auto& series : weekly) {
        std::vector<std::vector<double>> rw;
        for (int h = 1; h <= 12; ++h) rw.push_back(weekly_returns(series, h));
        for (std::size_t i = 0; i < series.size(); ++i) {
            out << series.firm_id() << ',' << series.bars()[i].week_index;
            for (int h = 0; h < 12; ++h) {
                if (is_undefined(rw[h][i])) {
                    out << ',';
                } else {
                    std::snprintf(buf, sizeof buf, "%.12g", rw[h][i]);
                    out << ',' << buf;
                }
            }
            if (is_undefined(rw[7][i]))
                out << ",\n";
            else
                out << ',' << label(rw[7][i], cutoff) << '\n';
        }
    }
}

}  // namespace ralpha
