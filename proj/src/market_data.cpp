#include "hiermf/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace hiermf::market {
namespace {

bool parse_price(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stod(cell, &used);
    return used == cell.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_table(const std::filesystem::path& path, char delim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": empty file");
  table.header = io::split_csv_line(line, delim);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = io::split_csv_line(line, delim);
    if (cells.size() != table.header.size()) {
      throw LocatedError(path.string() + ":" + std::to_string(lineno),
                         "expected " + std::to_string(table.header.size()) + " fields, found " +
                             std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

std::size_t column_index(const CsvTable& table, const std::string& name,
                         const std::filesystem::path& path) {
  const auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw Error(path.string() + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - table.header.begin());
}

std::vector<std::size_t> ticker_columns(const CsvTable& table, const CsvSchema& schema,
                                        std::size_t date_col, const std::filesystem::path& path) {
  std::vector<std::size_t> cols;
  if (schema.tickers.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c != date_col) cols.push_back(c);
    }
  } else {
    for (const auto& t : schema.tickers) cols.push_back(column_index(table, t, path));
  }
  if (cols.empty()) throw Error(path.string() + ": no ticker columns");
  return cols;
}

void check_dates(const CsvTable& table, std::size_t date_col, const std::filesystem::path& path) {
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    if (!(table.rows[r - 1][date_col] < table.rows[r][date_col])) {
      // +2: one for the header, one for 1-based numbering
      throw LocatedError(path.string() + ":" + std::to_string(r + 2),
                         "dates not strictly increasing ('" + table.rows[r - 1][date_col] +
                             "' then '" + table.rows[r][date_col] + "')");
    }
  }
}

}  // namespace

void PriceSeries::validate() const {
  if (prices.size() != timestamps.size()) throw Error(ticker + ": timestamps/prices length mismatch");
  if (prices.size() < 2) throw Error(ticker + ": a price series needs at least 2 observations");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      throw Error(ticker + ": non-positive price at " + timestamps[i]);
    }
    if (i > 0 && !(timestamps[i - 1] < timestamps[i])) {
      throw Error(ticker + ": timestamps not strictly increasing at " + timestamps[i]);
    }
  }
}

void ReturnsPanel::validate() const {
  if (static_cast<std::size_t>(values.cols()) != assets.size()) {
    throw Error("returns panel: column count does not match asset count");
  }
  if (!times.empty() && times.size() != rows()) throw Error("returns panel: time index length mismatch");
  if (!values.allFinite()) throw Error("returns panel: missing or non-finite entries");
  if (scale < 1) throw Error("returns panel: scale must be >= 1");
}

ReturnsPanel ReturnsPanel::slice(std::size_t begin, std::size_t length) const {
  if (begin + length > rows()) throw Error("returns panel: slice out of range");
  ReturnsPanel out;
  out.assets = assets;
  if (!times.empty()) {
    out.times.assign(times.begin() + static_cast<std::ptrdiff_t>(begin),
                     times.begin() + static_cast<std::ptrdiff_t>(begin + length));
  }
  out.values = values.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(length));
  out.scale = scale;
  return out;
}

ReturnsPanel ReturnsPanel::select_rows(std::span<const std::size_t> picks) const {
  ReturnsPanel out;
  out.assets = assets;
  out.scale = scale;
  out.values.resize(static_cast<Eigen::Index>(picks.size()), values.cols());
  for (std::size_t i = 0; i < picks.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(picks[i]));
    if (!times.empty()) out.times.push_back(times[picks[i]]);
  }
  return out;
}

LoadResult load_prices_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  const CsvTable table = read_table(path, schema.delimiter);
  const std::size_t date_col = column_index(table, schema.date_column, path);
  const auto cols = ticker_columns(table, schema, date_col, path);
  if (table.rows.empty()) throw Error(path.string() + ": no data rows");
  check_dates(table, date_col, path);

  LoadResult result;
  for (std::size_t c : cols) {
    PriceSeries s;
    s.ticker = table.header[c];
    std::size_t dropped = 0;
    for (const auto& row : table.rows) {
      double price = 0.0;
      if (parse_price(row[c], price) && price > 0.0) {
        s.timestamps.push_back(row[date_col]);
        s.prices.push_back(price);
      } else {
        ++dropped;
      }
    }
    if (s.prices.empty()) throw Error(path.string() + ": no valid rows for ticker '" + s.ticker + "'");
    s.validate();
    result.dropped[s.ticker] = dropped;
    result.series.push_back(std::move(s));
  }
  return result;
}

std::vector<double> log_returns(std::span<const double> prices, int scale) {
  if (scale < 1) throw Error("log_returns: scale must be >= 1");
  const auto ell = static_cast<std::size_t>(scale);
  if (ell >= prices.size()) {
    throw Error("log_returns: scale " + std::to_string(scale) + " >= series length " +
                std::to_string(prices.size()));
  }
  std::vector<double> out(prices.size() - ell);
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = std::log(prices[t + ell]) - std::log(prices[t]);
  }
  return out;
}

std::vector<double> log_returns(const PriceSeries& series, int scale) {
  return log_returns(std::span<const double>(series.prices), scale);
}

ReturnsPanel align_returns(const std::vector<PriceSeries>& series, int scale) {
  if (series.empty()) throw Error("align_returns: no series");
  std::set<std::string> common(series.front().timestamps.begin(), series.front().timestamps.end());
  for (std::size_t k = 1; k < series.size(); ++k) {
    std::set<std::string> next;
    for (const auto& d : series[k].timestamps) {
      if (common.count(d)) next.insert(d);
    }
    common = std::move(next);
  }
  const std::vector<std::string> dates(common.begin(), common.end());
  if (dates.size() <= static_cast<std::size_t>(scale)) {
    throw Error("align_returns: only " + std::to_string(dates.size()) + " common dates");
  }

  ReturnsPanel panel;
  panel.scale = scale;
  panel.times.assign(dates.begin() + scale, dates.end());
  panel.values.resize(static_cast<Eigen::Index>(dates.size() - static_cast<std::size_t>(scale)),
                      static_cast<Eigen::Index>(series.size()));
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::unordered_map<std::string, double> by_date;
    for (std::size_t i = 0; i < s.size(); ++i) by_date.emplace(s.timestamps[i], s.prices[i]);
    std::vector<double> aligned;
    aligned.reserve(dates.size());
    for (const auto& d : dates) aligned.push_back(by_date.at(d));
    const auto r = log_returns(std::span<const double>(aligned), scale);
    for (std::size_t t = 0; t < r.size(); ++t) {
      panel.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = r[t];
    }
    panel.assets.push_back(s.ticker);
  }
  return panel;
}

std::vector<double> cumulative_log_price(std::span<const double> returns) {
  std::vector<double> out(returns.size() + 1, 0.0);
  for (std::size_t t = 0; t < returns.size(); ++t) out[t + 1] = out[t] + returns[t];
  return out;
}

std::vector<double> column_log_price(const ReturnsPanel& panel, std::size_t col) {
  const Vector column = panel.values.col(static_cast<Eigen::Index>(col));
  return cumulative_log_price(std::span<const double>(column.data(), static_cast<std::size_t>(column.size())));
}

std::size_t window_stride(std::size_t sample_length, const WindowSpec& spec) {
  if (spec.count < 1) throw Error("window spec: count must be >= 1");
  if (spec.length < 1 || spec.length > sample_length) {
    throw Error("window spec: length " + std::to_string(spec.length) + " infeasible for " +
                std::to_string(sample_length) + " rows");
  }
  if (spec.count == 1) return sample_length - spec.length + 1;
  const std::size_t stride = (sample_length - spec.length) / (spec.count - 1);
  if (stride < 1) throw Error("window spec: too many windows for the sample (stride would be 0)");
  if (stride > spec.length) throw Error("window spec: windows would leave gaps (stride > length)");
  return stride;
}

std::vector<std::size_t> window_starts(std::size_t sample_length, const WindowSpec& spec) {
  const std::size_t stride = window_stride(sample_length, spec);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i + 1 < spec.count; ++i) starts.push_back(i * stride);
  // the last window is anchored on the final row
  starts.push_back(sample_length - spec.length);
  if (spec.count == 1) starts.front() = 0;
  return starts;
}

std::vector<ReturnsPanel> rolling_windows(const ReturnsPanel& panel, const WindowSpec& spec) {
  std::vector<ReturnsPanel> out;
  for (std::size_t start : window_starts(panel.rows(), spec)) out.push_back(panel.slice(start, spec.length));
  return out;
}

void write_returns_csv(const std::filesystem::path& path, const ReturnsPanel& panel,
                       const io::Json& provenance) {
  std::string text = "date";
  for (const auto& a : panel.assets) text += "," + a;
  text += "\n";
  for (std::size_t t = 0; t < panel.rows(); ++t) {
    text += panel.times.empty() ? std::to_string(t) : panel.times[t];
    for (std::size_t c = 0; c < panel.cols(); ++c) {
      text += ",";
      text += format_double(panel.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)));
    }
    text += "\n";
  }
  io::write_text_atomic(path, text);
  io::write_sidecar(path, provenance);
}

ReturnsPanel load_returns_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  const CsvTable table = read_table(path, schema.delimiter);
  const std::size_t date_col = column_index(table, schema.date_column, path);
  const auto cols = ticker_columns(table, schema, date_col, path);
  if (table.rows.empty()) throw Error(path.string() + ": no data rows");
  ReturnsPanel panel;
  panel.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c : cols) panel.assets.push_back(table.header[c]);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    panel.times.push_back(table.rows[r][date_col]);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double v = 0.0;
      if (!parse_price(table.rows[r][cols[k]], v)) {
        throw LocatedError(path.string() + ":" + std::to_string(r + 2),
                           "missing or invalid return for '" + table.header[cols[k]] + "'");
      }
      panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v;
    }
  }
  panel.validate();
  return panel;
}

}  // namespace hiermf::market
