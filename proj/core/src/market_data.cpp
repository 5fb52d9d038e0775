#include "lou/market_data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "lou/errors.hpp"
#include "lou/text.hpp"

namespace lou {
namespace {

constexpr std::string_view kColumns[] = {"tau_yr", "r_per_yr", "log_moneyness", "implied_vol"};

[[noreturn]] void fail(ErrorCode code, const std::string& origin, std::size_t line, const std::string& what) {
  throw Error(code, origin + ":" + std::to_string(line) + ": " + what);
}

void parse_header_comment(std::string_view body, MarketDataset& out, const std::string& origin, std::size_t line) {
  for (auto field : split(body, ',')) {
    field = trim(field);
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string key = to_lower(trim(field.substr(0, eq)));
    const std::string_view value = trim(field.substr(eq + 1));
    if (key == "s0") {
      const auto v = parse_double(value);
      if (!v || !(*v > 0.0)) fail(ErrorCode::kParseError, origin, line, "S0 must be a positive number");
      out.s0 = *v;
    } else if (key == "valuation_date") {
      out.valuation_date = std::string(value);
    } else if (key == "source") {
      out.source = std::string(value);
    }
  }
}

}  // namespace

std::size_t MarketDataset::quote_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.quotes.size();
  return n;
}

MarketDataset parse_market_csv(std::string_view text, const std::string& origin) {
  MarketDataset out;
  bool have_header = false;
  std::map<double, QuoteBlock> blocks;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      parse_header_comment(line.substr(1), out, origin, line_no);
      continue;
    }
    const auto cells = split(line, ',');
    if (!have_header) {
      bool match = cells.size() == std::size(kColumns);
      for (std::size_t c = 0; match && c < cells.size(); ++c) match = to_lower(trim(cells[c])) == kColumns[c];
      if (!match) {
        fail(ErrorCode::kSchemaMismatch, origin, line_no,
             "expected header tau_yr,r_per_yr,log_moneyness,implied_vol");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != std::size(kColumns)) {
      fail(ErrorCode::kParseError, origin, line_no, "expected 4 fields, got " + std::to_string(cells.size()));
    }
    double v[4];
    for (std::size_t c = 0; c < 4; ++c) {
      const auto parsed = parse_double(trim(cells[c]));
      if (!parsed) fail(ErrorCode::kParseError, origin, line_no, "not a number: '" + std::string(trim(cells[c])) + "'");
      v[c] = *parsed;
    }
    MarketQuote q{v[0], v[1], v[2], v[3]};
    if (!(q.tau > 0.0)) fail(ErrorCode::kParseError, origin, line_no, "tau_yr must be positive");
    if (!(q.implied_vol > 0.0)) fail(ErrorCode::kParseError, origin, line_no, "implied_vol must be positive");
    auto [it, inserted] = blocks.try_emplace(q.tau);
    QuoteBlock& block = it->second;
    if (inserted) {
      block.tau = q.tau;
      block.r = q.r;
    } else if (block.r != q.r) {
      fail(ErrorCode::kParseError, origin, line_no, "r_per_yr differs within the maturity block");
    }
    block.quotes.push_back(q);
  }
  if (!have_header) throw Error(ErrorCode::kSchemaMismatch, origin + ": missing column header");
  if (!(out.s0 > 0.0)) throw Error(ErrorCode::kSchemaMismatch, origin + ": missing '# S0=...' header comment");
  if (blocks.empty()) throw Error(ErrorCode::kEmptyBlock, origin + ": no quotes");
  for (auto& [tau, block] : blocks) {
    std::stable_sort(block.quotes.begin(), block.quotes.end(),
                     [](const MarketQuote& a, const MarketQuote& b) { return a.log_moneyness > b.log_moneyness; });
    out.blocks.push_back(std::move(block));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

MarketDataset load_market_csv(const std::filesystem::path& path) {
  return parse_market_csv(read_text_file(path), path.string());
}

std::string format_market_csv(const MarketDataset& data) {
  std::ostringstream os;
  os << "# S0=" << format_double(data.s0);
  if (!data.valuation_date.empty()) os << ", valuation_date=" << data.valuation_date;
  if (!data.source.empty()) os << ", source=" << data.source;
  os << "\ntau_yr,r_per_yr,log_moneyness,implied_vol\n";
  for (const auto& b : data.blocks) {
    for (const auto& q : b.quotes) {
      os << format_double(q.tau) << ',' << format_double(q.r) << ',' << format_double(q.log_moneyness) << ','
         << format_double(q.implied_vol) << '\n';
    }
  }
  return os.str();
}

void write_market_csv(const MarketDataset& data, const std::filesystem::path& path) {
  write_text_file(path, format_market_csv(data));
}

}  // namespace lou
