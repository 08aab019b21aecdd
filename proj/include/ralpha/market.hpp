#pragma once

// Weekly OHLC construction, forward h-week return targets, binary labels,
// the tau filter, and the ten technical indicators behind the price-only
// baseline model.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ralpha/ingest.hpp"

namespace ralpha {

struct WeeklyBar {
    std::string firm_id;
    std::int32_t week_index = 0;
    double open = 0;   // first trading day's open
    double close = 0;  // last trading day's close
    double low = 0;    // min of daily lows
    double high = 0;   // max of daily highs
};

// Weekly bars for one firm. Indices are calendar week indices; weeks with no
// trading days (holiday weeks) are simply absent.
class WeeklySeries {
public:
    WeeklySeries() = default;
    WeeklySeries(std::string firm_id, std::vector<WeeklyBar> bars);

    const std::string& firm_id() const { return firm_id_; }
    const std::vector<WeeklyBar>& bars() const { return bars_; }
    std::size_t size() const { return bars_.size(); }

    // position of the bar at calendar week w, or npos when that week had no
    // trading days
    std::size_t position_of_week(std::int32_t w) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::string firm_id_;
    std::vector<WeeklyBar> bars_;  // week_index ascending
    std::map<std::int32_t, std::size_t> week_to_pos_;
};

// Groups daily bars into one weekly bar per calendar week with >= 1 trading
// day. Input must be sorted by (firm_id, trade_date) with no duplicates.
std::vector<WeeklySeries> weekly_bars(const std::vector<DailyBar>& daily);

// RW_h per bar: (close at week w+h minus close at week w) / close at week w.
// Undefined when week w+h has no bar (end of series or holiday week).
std::vector<double> weekly_returns(const WeeklySeries& series, int horizon);

inline int label(double rw, double cutoff = 0.0) { return rw >= cutoff ? 1 : 0; }

struct LabeledSample {
    std::string firm_id;
    std::int32_t week_index = 0;
    double rw = 0;  // raw h-week return
    int label = 0;
};

// All defined RW_h samples across firms (default horizon 8, cutoff 0).
std::vector<LabeledSample> labeled_samples(const std::vector<WeeklySeries>& weekly, int horizon = 8,
                                           double cutoff = 0.0);

// Keeps samples with rw > tau (relabeled 1) or rw < -tau (relabeled 0);
// strict on both sides, so tau = 0 drops exact-zero returns.
std::vector<LabeledSample> tau_filter(const std::vector<LabeledSample>& samples, double tau);

// ---------------------------------------------------------------------------
// technical indicators

struct IndicatorVector {
    double sma10 = 0, wma10 = 0, momentum = 0, stoch_k = 0, stoch_d = 0, rsi = 0, macd = 0,
           williams_r = 0, ad_osc = 0, cci = 0;

    std::array<double, 10> as_array() const {
        return {sma10, wma10, momentum, stoch_k, stoch_d, rsi, macd, williams_r, ad_osc, cci};
    }
    static const std::array<const char*, 10>& names();
};

// All ten indicators at bar position t (0-based within the series), with
// period n (default 10). Positions with fewer than 26 + n earlier bars get an
// all-undefined vector (EMA(26) warm-up for MACD). Degenerate-range
// conventions: K% and Williams %R are 50 when the window's high equals its
// low; RSI is 100 when the down-move sum is zero, 0 when the up-move sum is
// zero, 50 when both are; CCI is 0 when its mean deviation is zero; the A/D
// oscillator alone stays undefined when high == low on the current bar.
IndicatorVector technical_indicators(const WeeklySeries& series, std::size_t t, int n = 10);

bool indicators_defined(const IndicatorVector& v);

// CSV: firm_id, week_index, ten named columns. Undefined rows are skipped.
void write_indicators_csv(std::ostream& out, const std::vector<WeeklySeries>& weekly, int n = 10);

// CSV export of rw_1..rw_12 and the default label per (firm, week).
void write_targets_csv(std::ostream& out, const std::vector<WeeklySeries>& weekly,
                       double cutoff = 0.0);

}  // namespace ralpha
