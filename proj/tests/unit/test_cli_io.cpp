#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <functional>

#include "lou/errors.hpp"
#include "lou/market_data.hpp"
#include "lou/pipeline.hpp"

using namespace lou;

namespace {

std::string bundled_path() { return std::string(LOU_DATA_DIR) + "/intesa_2007-11-22.csv"; }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

PipelineConfig pricing_only() {
  PipelineConfig c;
  c.params = ModelParams{5.6, 1.9, 0.264, -0.41, 1.0, 0.0};
  c.smile_points = 9;
  return c;
}

}  // namespace

TEST(MarketCsv, BundledTable) {
  const auto d = load_market_csv(bundled_path());
  EXPECT_EQ(d.s0, 5.16);
  EXPECT_EQ(d.valuation_date, "2007-11-22");
  ASSERT_EQ(d.blocks.size(), 6u);
  EXPECT_EQ(d.quote_count(), 38u);
  const auto& q = d.blocks[0].quotes[0];
  EXPECT_EQ(q.tau, 0.0795);
  EXPECT_EQ(q.r, 0.0425);
  EXPECT_EQ(q.log_moneyness, 0.0626);
  EXPECT_EQ(q.implied_vol, 0.3354);
  EXPECT_EQ(d.blocks[3].quotes[0].log_moneyness, 0.1496);
  const std::vector<std::size_t> sizes{5, 8, 7, 8, 6, 4};
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    EXPECT_EQ(d.blocks[i].quotes.size(), sizes[i]);
    if (i > 0) EXPECT_GT(d.blocks[i].tau, d.blocks[i - 1].tau);
    for (std::size_t j = 1; j < d.blocks[i].quotes.size(); ++j) {
      EXPECT_GT(d.blocks[i].quotes[j - 1].log_moneyness, d.blocks[i].quotes[j].log_moneyness);
    }
  }
}

TEST(MarketCsv, RoundTripIsLossless) {
  const auto d = load_market_csv(bundled_path());
  const auto back = parse_market_csv(format_market_csv(d));
  EXPECT_EQ(format_market_csv(back), format_market_csv(d));
  ASSERT_EQ(back.blocks.size(), d.blocks.size());
  for (std::size_t i = 0; i < d.blocks.size(); ++i) {
    for (std::size_t j = 0; j < d.blocks[i].quotes.size(); ++j) {
      EXPECT_EQ(back.blocks[i].quotes[j].implied_vol, d.blocks[i].quotes[j].implied_vol);
      EXPECT_EQ(back.blocks[i].quotes[j].log_moneyness, d.blocks[i].quotes[j].log_moneyness);
    }
  }
}

TEST(MarketCsv, NonPositiveVolNamesLine) {
  const std::string text =
      "# S0=5.16\ntau_yr,r_per_yr,log_moneyness,implied_vol\n0.1,0.04,0.0,0.3\n0.1,0.04,0.05,-0.2\n";
  try {
    parse_market_csv(text, "quotes.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("quotes.csv:4"), std::string::npos);
  }
}

TEST(MarketCsv, SchemaErrors) {
  EXPECT_EQ(code_of([] { parse_market_csv(""); }), ErrorCode::kSchemaMismatch);
  EXPECT_EQ(code_of([] { parse_market_csv("# S0=1\ntau,r,lm,iv\n"); }), ErrorCode::kSchemaMismatch);
  EXPECT_EQ(code_of([] { parse_market_csv("tau_yr,r_per_yr,log_moneyness,implied_vol\n0.1,0,0,0.2\n"); }),
            ErrorCode::kSchemaMismatch);
  EXPECT_EQ(code_of([] { parse_market_csv("# S0=1\ntau_yr,r_per_yr,log_moneyness,implied_vol\n"); }),
            ErrorCode::kEmptyBlock);
  EXPECT_EQ(code_of([] { parse_market_csv("# S0=1\ntau_yr,r_per_yr,log_moneyness,implied_vol\n0.1,0,x,0.2\n"); }),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { load_market_csv("/nonexistent/lou.csv"); }), ErrorCode::kIoError);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Pipeline, PricingOnlyRun) {
  const auto d = load_market_csv(bundled_path());
  const auto r = run_pipeline(d, pricing_only());
  EXPECT_FALSE(r.calibration.has_value());
  for (const char* f : {"fitted_stats.txt", "fitted_stats.csv", "parameters.txt", "parameters.csv", "smile.csv",
                        "quotes.csv"}) {
    EXPECT_TRUE(r.files.count(f)) << f;
  }
  EXPECT_EQ(r.files.count("pdf.csv"), 0u);
  // header + 6 maturities x 9 points
  EXPECT_EQ(std::count(r.files.at("smile.csv").begin(), r.files.at("smile.csv").end(), '\n'), 1 + 6 * 9);
}

TEST(Pipeline, CalibratedRunWithPdf) {
  const auto d = load_market_csv(bundled_path());
  PipelineConfig c;
  c.pdf = true;
  c.pdf_points = 21;
  c.smile_points = 5;
  const auto r = run_pipeline(d, c);
  ASSERT_TRUE(r.calibration.has_value());
  EXPECT_NEAR(r.params.m, 0.264, 0.016);
  EXPECT_TRUE(r.files.count("pdf.csv"));
  EXPECT_NE(r.files.at("parameters.csv").find("Linear,"), std::string::npos);
}

TEST(Pipeline, RerunIsByteIdentical) {
  const auto d = load_market_csv(bundled_path());
  const auto a = run_pipeline(d, pricing_only());
  const auto b = run_pipeline(d, pricing_only());
  EXPECT_EQ(a.files, b.files);
}

TEST(Manifest, JsonRoundTrip) {
  RunManifest m;
  m.version = "0.1.0";
  m.market_path = "data/x.csv";
  m.market_sha256 = "00ff";
  m.params_path = "p.params";
  m.params_sha256 = "11aa";
  m.config.model = ModelKind::kExpOU;
  m.config.sim.seed = 99;
  m.config.sim.n_paths = 12345;
  m.config.lambda = 0.3;
  m.config.pdf = true;
  const std::string text = manifest_to_json(m);
  EXPECT_EQ(manifest_to_json(manifest_from_json(text)), text);
}

TEST(Manifest, RegeneratedRunIsIdentical) {
  const auto dir = std::filesystem::temp_directory_path() / "lou_manifest_test";
  std::filesystem::create_directories(dir);
  const auto params = dir / "lin.params";
  write_text_file(params, format_params(*pricing_only().params));
  RunManifest m;
  m.version = std::string(tool_version());
  m.market_path = bundled_path();
  m.market_sha256 = sha256_file(bundled_path());
  m.params_path = params;
  m.params_sha256 = sha256_file(params);
  m.config.smile_points = 7;
  const auto first = run_from_manifest(m);
  const auto again = run_from_manifest(manifest_from_json(first.files.at("manifest.json")));
  EXPECT_EQ(first.files, again.files);

  m.market_sha256 = "deadbeef";
  EXPECT_EQ(code_of([&] { run_from_manifest(m); }), ErrorCode::kSchemaMismatch);
  std::filesystem::remove_all(dir);
}
