#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lou/calibration.hpp"

namespace lou {

struct QuoteBlock {
  double tau = 0.0;
  double r = 0.0;
  std::vector<MarketQuote> quotes;  // log_moneyness descending
};

struct MarketDataset {
  double s0 = 0.0;
  std::string valuation_date;
  std::string source;
  std::vector<QuoteBlock> blocks;  // tau ascending

  std::size_t quote_count() const;
};

// CSV with a "# S0=..., valuation_date=..., source=..." comment line and the
// columns tau_yr,r_per_yr,log_moneyness,implied_vol.
MarketDataset parse_market_csv(std::string_view text, const std::string& origin = "<input>");
MarketDataset load_market_csv(const std::filesystem::path& path);

std::string format_market_csv(const MarketDataset& data);
void write_market_csv(const MarketDataset& data, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace lou
