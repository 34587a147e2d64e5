#include <gtest/gtest.h>

#include "oracles.hpp"
#include "usdeid/metrics.hpp"

using namespace usdeid;
using namespace usdeid::metrics;

using AnyImage = std::variant<GrayImage, RgbImage>;

TEST(Dice, Examples) {
  BitMask a(2, 2), b(2, 2);
  EXPECT_DOUBLE_EQ(dice_score(a, b), 1.0);
  a.set(0, 0);
  EXPECT_DOUBLE_EQ(dice_score(a, b), 0.0);
  b.set(0, 0);
  b.set(0, 1);
  EXPECT_DOUBLE_EQ(dice_score(a, b), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(dice_score(a, a), 1.0);
  EXPECT_THROW(dice_score(a, BitMask(2, 3)), Error);
}

TEST(Dice, LabelSelection) {
  const GrayImage p(1, 4, {1, 2, 2, 0});
  const GrayImage t(1, 4, {1, 2, 0, 0});
  EXPECT_DOUBLE_EQ(dice_score(p, t), 1.0);
  EXPECT_DOUBLE_EQ(dice_score(p, t, 2), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(dice_score(p, t, 7), 1.0);
}

TEST(Dice, PropertyMatchesOracleSymmetricBounded) {
  oracle::Gen g(5);
  for (int trial = 0; trial < 300; ++trial) {
    const BitMask a = oracle::random_mask(g, 16);
    BitMask b(a.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < a.cols(); ++c) b.set(r, c, g.coin(0.4));
    const double d = dice_score(a, b);
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, 1.0);
    ASSERT_DOUBLE_EQ(d, dice_score(b, a));
    ASSERT_NEAR(d, oracle::dice(a, b), 1e-15);
    ASSERT_DOUBLE_EQ(dice_score(a, a), 1.0);
  }
}

TEST(Imshowpair, PartitionsPixels) {
  oracle::Gen g(6);
  for (int trial = 0; trial < 50; ++trial) {
    const BitMask p = oracle::random_mask(g, 12);
    BitMask t(p.rows(), p.cols());
    for (std::size_t i = 0; i < t.size(); ++i) t.set_index(i, g.coin());
    const RgbImage img = imshowpair(p, t);
    for (int r = 0; r < p.rows(); ++r)
      for (int c = 0; c < p.cols(); ++c) {
        const Color px{img.at(r, c, 0), img.at(r, c, 1), img.at(r, c, 2)};
        const Color want = p.at(r, c) && t.at(r, c) ? Color{255, 255, 255}
                           : p.at(r, c)             ? default_pred_color
                           : t.at(r, c)             ? default_true_color
                                                    : Color{0, 0, 0};
        ASSERT_EQ(px, want);
      }
  }
}

TEST(Imshowpair, CustomColors) {
  BitMask p(1, 2), t(1, 2);
  p.set(0, 0);
  t.set(0, 1);
  const RgbImage img = imshowpair(p, t, {1, 2, 3}, {4, 5, 6});
  EXPECT_EQ(img.at(0, 0, 2), 3);
  EXPECT_EQ(img.at(0, 1, 0), 4);
}

TEST(ColorSelect, GrayAndRgb) {
  GrayImage g(2, 3);
  g.at(1, 2) = 42;
  EXPECT_EQ(format_tuple(color_select(AnyImage(g), 2, 1)), "(42,)");
  RgbImage c(2, 2);
  c.at(0, 1, 0) = 1;
  c.at(0, 1, 1) = 2;
  c.at(0, 1, 2) = 3;
  EXPECT_EQ(format_tuple(color_select(AnyImage(c), 1, 0)), "(1, 2, 3)");
  EXPECT_THROW(color_select(AnyImage(g), 3, 0), Error);
  EXPECT_THROW(color_select(AnyImage(g), 0, -1), Error);
}

TEST(Format, Score) {
  EXPECT_EQ(format_score(1.0), "1.0");
  EXPECT_EQ(format_score(0.0), "0.0");
  EXPECT_EQ(format_score(0.5), "0.5");
  EXPECT_EQ(format_score(2.0 / 3.0), "0.666667");
}

TEST(Compression, RatioIsOneMinusRetained) {
  oracle::Gen g(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto before = static_cast<std::uint64_t>(g.integer(1, 1 << 30));
    const auto img = static_cast<std::uint64_t>(g.integer(0, 1 << 29));
    const auto meta = static_cast<std::uint64_t>(g.integer(0, 1 << 20));
    const CompressionReport r = compression_report(before, img, meta);
    ASSERT_EQ(r.after_bytes(), img + meta);
    ASSERT_NEAR(r.ratio(), 1.0 - static_cast<double>(img + meta) / static_cast<double>(before), 1e-15);
  }
  EXPECT_THROW(compression_report(0, 1, 1), Error);
}

TEST(Compression, SizeFormatting) {
  EXPECT_EQ(format_size(969'000'000), "969 MB");
  EXPECT_EQ(format_size(273'800'000), "273.8 MB");
  EXPECT_EQ(format_size(209'000), "209 KB");
  EXPECT_EQ(format_size(512), "512 B");
  EXPECT_EQ(format_size(1'500'000'000), "1.5 GB");
  EXPECT_EQ(format_size(274'009'000, true), "~274 MB");
  EXPECT_EQ(format_percent(0.283), "28.3%");
}

TEST(Compression, TableRendering) {
  const CompressionReport r = compression_report(969'000'000, 273'800'000, 209'000);
  const std::string table = render_table(r);
  EXPECT_EQ(table.rfind("Before ", 0), 0u);
  EXPECT_NE(table.find("Image Data | MetaData | Total"), std::string::npos);
  EXPECT_NE(table.find("969 MB (100%) | 273.8 MB   | 209 KB   | ~274 MB (28.3%) | 71.7%"), std::string::npos)
      << table;
  for (const char* cell : {"969 MB (100%)", "273.8 MB", "209 KB", "~274 MB (28.3%)", "71.7%"})
    EXPECT_NE(table.find(cell), std::string::npos) << cell;
}
