#include "phi4/data.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "phi4/errors.hpp"
#include "phi4/io.hpp"

namespace phi4 {

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return false;
  const int y = std::stoi(s.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                     std::chrono::day{d}}
      .ok();
}

void PriceTable::insert(const std::string& ticker, const std::string& date, double close) {
  auto [it, inserted] = prices[ticker].emplace(date, close);
  if (!inserted) throw InputError("duplicate price for (" + ticker + ", " + date + ")");
}

void PriceTable::merge(const PriceTable& other) {
  for (const auto& [ticker, series] : other.prices)
    for (const auto& [date, close] : series) insert(ticker, date, close);
}

namespace {

std::size_t column_index(const CsvTable& t, const std::string& name,
                         const std::filesystem::path& path) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw InputError(path.string() + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - t.header.begin());
}

double parse_price(const std::string& field, const std::string& ctx) {
  const double p = parse_double(field, ctx);
  if (!std::isfinite(p) || p <= 0) throw InputError(ctx + ": price must be positive, got '" + field + "'");
  return p;
}

void check_date(const std::string& date, const std::string& ctx) {
  if (!is_iso_date(date)) throw InputError(ctx + ": not an ISO-8601 date: '" + date + "'");
}

}  // namespace

PriceTable ingest_csv(const std::filesystem::path& path, const LongSchema& schema) {
  const auto t = read_csv(path);
  const auto dc = column_index(t, schema.date_col, path);
  const auto tc = column_index(t, schema.ticker_col, path);
  const auto cc = column_index(t, schema.close_col, path);
  PriceTable table;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto ctx = path.string() + ":" + std::to_string(t.line_numbers[r]);
    const auto& row = t.rows[r];
    check_date(row[dc], ctx);
    if (row[tc].empty()) throw InputError(ctx + ": empty ticker");
    try {
      table.insert(row[tc], row[dc], parse_price(row[cc], ctx));
    } catch (const InputError& e) {
      throw InputError(ctx + ": " + e.what());
    }
  }
  if (table.empty()) throw InputError(path.string() + ": no price rows");
  return table;
}

PriceTable ingest_wide_csv(const std::filesystem::path& path, const std::string& date_col) {
  const auto t = read_csv(path);
  const auto dc = column_index(t, date_col, path);
  std::vector<std::pair<std::size_t, std::string>> columns;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == dc) continue;
    const bool lone_close = t.header.size() == 2 && t.header[c] == "close";
    columns.emplace_back(c, lone_close ? path.stem().string() : t.header[c]);
  }
  if (columns.empty()) throw InputError(path.string() + ": no price columns");
  PriceTable table;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto ctx = path.string() + ":" + std::to_string(t.line_numbers[r]);
    const auto& row = t.rows[r];
    check_date(row[dc], ctx);
    for (const auto& [c, ticker] : columns) {
      if (row[c].empty() || row[c] == "NA") continue;
      try {
        table.insert(ticker, row[dc], parse_price(row[c], ctx));
      } catch (const InputError& e) {
        throw InputError(ctx + ": " + e.what());
      }
    }
  }
  if (table.empty()) throw InputError(path.string() + ": no price rows");
  return table;
}

Eigen::Index ReturnPanel::column(const std::string& ticker) const {
  const auto it = std::find(tickers.begin(), tickers.end(), ticker);
  if (it == tickers.end()) throw InputError("ticker '" + ticker + "' not in panel");
  return static_cast<Eigen::Index>(it - tickers.begin());
}

ReturnPanel ReturnPanel::select(const std::vector<std::string>& subset) const {
  ReturnPanel out;
  out.tickers = subset;
  out.dates = dates;
  out.returns.resize(days(), static_cast<Eigen::Index>(subset.size()));
  for (std::size_t k = 0; k < subset.size(); ++k)
    out.returns.col(static_cast<Eigen::Index>(k)) = returns.col(column(subset[k]));
  return out;
}

ReturnPanel ReturnPanel::rows(Eigen::Index first, Eigen::Index count) const {
  if (first < 0 || count < 0 || first + count > days()) throw InputError("row range out of bounds");
  ReturnPanel out;
  out.tickers = tickers;
  out.dates.assign(dates.begin() + first, dates.begin() + first + count);
  out.returns = returns.middleRows(first, count);
  return out;
}

void ReturnPanel::validate() const {
  if (static_cast<Eigen::Index>(tickers.size()) != returns.cols() ||
      static_cast<Eigen::Index>(dates.size()) != returns.rows())
    throw InputError("panel labels do not match the return matrix");
  if (std::set<std::string>(tickers.begin(), tickers.end()).size() != tickers.size())
    throw InputError("panel has duplicate tickers");
  for (std::size_t i = 1; i < dates.size(); ++i)
    if (!(dates[i - 1] < dates[i])) throw InputError("panel dates are not strictly increasing at " + dates[i]);
  if (!returns.allFinite()) throw InputError("panel has non-finite returns");
}

ReturnPanel log_returns(const PriceTable& table, AlignmentReport* report) {
  if (table.empty()) throw InputError("no prices to convert");
  std::map<std::string, int> seen;
  for (const auto& [ticker, series] : table.prices) {
    if (series.size() < 2) throw InputError("ticker '" + ticker + "' has fewer than two prices");
    for (const auto& [date, _] : series) ++seen[date];
  }
  const int n_tickers = static_cast<int>(table.prices.size());
  std::vector<std::string> common;
  std::vector<std::string> dropped;
  for (const auto& [date, count] : seen) (count == n_tickers ? common : dropped).push_back(date);
  if (common.size() < 2) throw InputError("tickers share fewer than two dates; aligned panel is empty");
  if (report) report->dropped_dates = dropped;

  ReturnPanel panel;
  panel.dates.assign(common.begin() + 1, common.end());
  panel.returns.resize(static_cast<Eigen::Index>(common.size() - 1), n_tickers);
  Eigen::Index c = 0;
  for (const auto& [ticker, series] : table.prices) {
    panel.tickers.push_back(ticker);
    for (std::size_t k = 1; k < common.size(); ++k)
      panel.returns(static_cast<Eigen::Index>(k - 1), c) =
          std::log(series.at(common[k]) / series.at(common[k - 1]));
    ++c;
  }
  panel.validate();
  return panel;
}

Eigen::VectorXd binarize(const Eigen::Ref<const Eigen::VectorXd>& series) {
  return series.unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
}

ReturnPanel binarize(const ReturnPanel& panel) {
  ReturnPanel out = panel;
  out.returns = panel.returns.unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
  return out;
}

Eigen::VectorXd sma(const Eigen::Ref<const Eigen::VectorXd>& series, Eigen::Index window) {
  if (window < 1 || window > series.size())
    throw InputError("moving-average window " + std::to_string(window) + " does not fit a series of length " +
                     std::to_string(series.size()));
  Eigen::VectorXd out(series.size() - window + 1);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = series.segment(i, window).mean();
  return out;
}

Eigen::VectorXd minmax_rescale(const Eigen::Ref<const Eigen::VectorXd>& series, double target_min,
                               double target_max) {
  if (series.size() == 0) return {};
  const double lo = series.minCoeff();
  const double hi = series.maxCoeff();
  if (lo == hi) return Eigen::VectorXd::Constant(series.size(), 0.5 * (target_min + target_max));
  return series.unaryExpr([&](double x) {
    if (x == hi) return target_max;
    return target_min + (x - lo) / (hi - lo) * (target_max - target_min);
  });
}

WindowedDataset build_windows(const Eigen::Ref<const Eigen::VectorXd>& series, Eigen::Index window,
                              Eigen::Index stride, std::optional<Eigen::Index> max_count) {
  if (window < 1 || stride < 1) throw InputError("window and stride must be >= 1");
  const Eigen::Index usable = series.size() - window + 1;
  if (usable < 1)
    throw InputError("series of length " + std::to_string(series.size()) +
                     " is too short for window " + std::to_string(window));
  std::vector<Eigen::Index> anchors;
  for (Eigen::Index i = series.size() - 1; i >= window - 1; i -= stride) {
    if (max_count && static_cast<Eigen::Index>(anchors.size()) >= *max_count) break;
    anchors.push_back(i);
  }
  std::reverse(anchors.begin(), anchors.end());

  WindowedDataset ds;
  ds.window = window;
  ds.anchors = anchors;
  ds.vectors.resize(static_cast<Eigen::Index>(anchors.size()), window);
  for (std::size_t k = 0; k < anchors.size(); ++k)
    ds.vectors.row(static_cast<Eigen::Index>(k)) =
        series.segment(anchors[k] - window + 1, window).reverse().transpose();
  return ds;
}

WindowedDataset build_windows(const ReturnPanel& panel, const std::string& ticker,
                              Eigen::Index window, Eigen::Index stride,
                              std::optional<Eigen::Index> max_count) {
  auto ds = build_windows(panel.returns.col(panel.column(ticker)), window, stride, max_count);
  for (auto a : ds.anchors) ds.anchor_dates.push_back(panel.dates[static_cast<std::size_t>(a)]);
  return ds;
}

Standardizer Standardizer::fit(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  if (rows.rows() < 1) throw InputError("cannot standardize an empty data set");
  Standardizer s;
  s.mean = rows.colwise().mean().transpose();
  s.scale.resize(rows.cols());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double ss = (rows.col(c).array() - s.mean(c)).square().sum();
    const double sd = rows.rows() > 1 ? std::sqrt(ss / static_cast<double>(rows.rows() - 1)) : 0.0;
    s.scale(c) = sd > 0 ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(Eigen::Index columns) {
  return {Eigen::VectorXd::Zero(columns), Eigen::VectorXd::Ones(columns)};
}

Eigen::MatrixXd Standardizer::apply(const Eigen::Ref<const Eigen::MatrixXd>& rows) const {
  if (rows.cols() != mean.size()) throw InputError("standardizer width mismatch");
  return (rows.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

}  // namespace phi4
