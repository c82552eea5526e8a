#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hiermf/common.hpp"
#include "hiermf/io.hpp"

namespace hiermf::market {

// Daily price history of a single ticker. Dates are opaque labels compared
// lexicographically (ISO-8601 sorts correctly as text).
struct PriceSeries {
  std::string ticker;
  std::vector<std::string> timestamps;
  std::vector<double> prices;

  // Throws unless prices > 0, timestamps strictly increasing and length >= 2.
  void validate() const;
  std::size_t size() const { return prices.size(); }
};

// Log-returns, rows = time, columns = assets. An empty `times` means the rows
// are indexed implicitly by 0..rows-1 (simulated data).
struct ReturnsPanel {
  std::vector<std::string> assets;
  std::vector<std::string> times;
  Matrix values;
  int scale = 1;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  void validate() const;
  ReturnsPanel slice(std::size_t begin, std::size_t length) const;
  ReturnsPanel select_rows(std::span<const std::size_t> rows) const;
};

struct CsvSchema {
  std::string date_column = "date";
  // Empty selects every non-date column.
  std::vector<std::string> tickers;
  char delimiter = ',';
};

struct LoadResult {
  std::vector<PriceSeries> series;
  std::map<std::string, std::size_t> dropped;  // rows dropped per ticker
};

LoadResult load_prices_csv(const std::filesystem::path& path, const CsvSchema& schema);

// Element t is log p[t+scale] - log p[t]; output length N - scale.
std::vector<double> log_returns(std::span<const double> prices, int scale);
std::vector<double> log_returns(const PriceSeries& series, int scale);

// Aligns tickers on the intersection of their surviving dates, then takes
// log-returns at `scale`. Row labels are the end date of each return.
ReturnsPanel align_returns(const std::vector<PriceSeries>& series, int scale = 1);

// Cumulative log-price path starting at 0; length = returns + 1.
std::vector<double> cumulative_log_price(std::span<const double> returns);
std::vector<double> column_log_price(const ReturnsPanel& panel, std::size_t col);

struct WindowSpec {
  std::size_t length = 0;
  std::size_t count = 1;
};

std::size_t window_stride(std::size_t sample_length, const WindowSpec& spec);
std::vector<std::size_t> window_starts(std::size_t sample_length, const WindowSpec& spec);
std::vector<ReturnsPanel> rolling_windows(const ReturnsPanel& panel, const WindowSpec& spec);

// CSV with header `date,<assets...>`; a one-line JSON sidecar is written next to it.
void write_returns_csv(const std::filesystem::path& path, const ReturnsPanel& panel,
                       const io::Json& provenance = io::Json::object());
ReturnsPanel load_returns_csv(const std::filesystem::path& path, const CsvSchema& schema);

}  // namespace hiermf::market
