#include <gtest/gtest.h>

#include "oracles.hpp"
#include "usdeid/components.hpp"
#include "usdeid/imgbuf.hpp"

using namespace usdeid;

namespace {

GrayImage ramp(int rows, int cols) {
  GrayImage img(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) img.at(r, c) = static_cast<std::uint8_t>(r * cols + c);
  return img;
}

GrayImage random_image(oracle::Gen& g) {
  GrayImage img(g.integer(1, 20), g.integer(1, 20));
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(g.integer(0, 255));
  return img;
}

BoundingBox random_box(oracle::Gen& g, int rows, int cols) {
  const int x = g.integer(0, cols - 1), y = g.integer(0, rows - 1);
  return {x, y, g.integer(1, cols - x), g.integer(1, rows - y)};
}

}  // namespace

TEST(Luma, FixedPoints) {
  EXPECT_EQ(luma(255, 255, 255), 255);
  EXPECT_EQ(luma(0, 0, 0), 0);
  EXPECT_EQ(luma(255, 0, 0), 76);
  EXPECT_EQ(luma(0, 255, 0), 150);
  EXPECT_EQ(luma(0, 0, 255), 29);
}

TEST(Luma, ToGrayAppliesPerPixel) {
  RgbImage img(1, 2);
  img.at(0, 0, 0) = 255;
  img.at(0, 1, 0) = img.at(0, 1, 1) = img.at(0, 1, 2) = 200;
  const GrayImage g = to_gray(img);
  EXPECT_EQ(g.at(0, 0), 76);
  EXPECT_EQ(g.at(0, 1), 200);
  EXPECT_EQ(to_gray(img), g);
}

TEST(Raster, RejectsEmptyAndMismatchedData) {
  EXPECT_THROW(GrayImage(0, 3), Error);
  EXPECT_THROW(GrayImage(2, 2, std::vector<std::uint8_t>(3)), Error);
  EXPECT_NO_THROW(RgbImage(2, 2, std::vector<std::uint8_t>(12)));
}

TEST(Crop, IdentityAndCenter) {
  const GrayImage img = ramp(4, 4);
  EXPECT_EQ(crop(img, {0, 0, 4, 4}), img);
  const GrayImage mid = crop(img, {1, 1, 2, 2});
  ASSERT_EQ(mid.rows(), 2);
  ASSERT_EQ(mid.cols(), 2);
  EXPECT_EQ(mid.at(0, 0), 5);
  EXPECT_EQ(mid.at(0, 1), 6);
  EXPECT_EQ(mid.at(1, 0), 9);
  EXPECT_EQ(mid.at(1, 1), 10);
  EXPECT_EQ(crop(mid, mid.bounds()), mid);
}

TEST(Crop, OutOfBoundsRejected) {
  const GrayImage img = ramp(4, 4);
  try {
    crop(img, {3, 3, 2, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::rejected_input);
  }
  EXPECT_THROW(crop(img, {0, 0, 0, 1}), Error);
  EXPECT_THROW(crop(img, {-1, 0, 2, 2}), Error);
}

TEST(FillBox, ZeroesBoxAndIsIdempotent) {
  const GrayImage img = ramp(5, 6);
  const BoundingBox box{1, 2, 3, 2};
  const GrayImage once = fill_box(img, box, 0);
  int sum = 0;
  for (int r = box.y; r < box.bottom(); ++r)
    for (int c = box.x; c < box.right(); ++c) sum += once.at(r, c);
  EXPECT_EQ(sum, 0);
  EXPECT_EQ(fill_box(once, box, 0), once);
  EXPECT_THROW(fill_box(img, {5, 0, 2, 2}, 0), Error);
}

TEST(FillBox, PropertyOutsideUntouched) {
  oracle::Gen g(11);
  for (int trial = 0; trial < 200; ++trial) {
    const GrayImage img = random_image(g);
    const BoundingBox box = random_box(g, img.rows(), img.cols());
    const auto value = static_cast<std::uint8_t>(g.integer(0, 255));
    const GrayImage out = fill_box(img, box, value);
    for (int r = 0; r < img.rows(); ++r)
      for (int c = 0; c < img.cols(); ++c)
        ASSERT_EQ(out.at(r, c), box.contains(c, r) ? value : img.at(r, c));
  }
}

TEST(Crop, PropertyMatchesSourcePixels) {
  oracle::Gen g(12);
  for (int trial = 0; trial < 200; ++trial) {
    const GrayImage img = random_image(g);
    EXPECT_EQ(crop(img, img.bounds()), img);
    const BoundingBox box = random_box(g, img.rows(), img.cols());
    const GrayImage c = crop(img, box);
    for (int r = 0; r < box.h; ++r)
      for (int col = 0; col < box.w; ++col) ASSERT_EQ(c.at(r, col), img.at(box.y + r, box.x + col));
  }
}

TEST(FrameStack, ValidatesFrames) {
  EXPECT_THROW(FrameStack("x", std::vector<GrayImage>{}), Error);
  std::vector<GrayImage> mixed{GrayImage(2, 2), GrayImage(2, 3)};
  try {
    FrameStack("x", mixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
  }
  FrameStack ok("a.dcm", std::vector<RgbImage>{RgbImage(2, 3), RgbImage(2, 3)});
  EXPECT_EQ(ok.channels(), 3);
  EXPECT_EQ(ok.size(), 2u);
  EXPECT_EQ(ok.raw_bytes(), 2u * 2 * 3 * 3);
  EXPECT_EQ(ok.source_id(), "a.dcm");
}

TEST(FrameStack, MaxProjection) {
  GrayImage a(1, 3), b(1, 3);
  a.at(0, 0) = 5;
  b.at(0, 0) = 3;
  b.at(0, 2) = 9;
  const GrayImage m = max_projection(FrameStack("s", std::vector<GrayImage>{a, b}));
  EXPECT_EQ(m.at(0, 0), 5);
  EXPECT_EQ(m.at(0, 1), 0);
  EXPECT_EQ(m.at(0, 2), 9);
}

TEST(BitMask, BoundsAndSubset) {
  BitMask m(5, 7);
  EXPECT_EQ(mask_bounds(m).area(), 0);
  m.set(1, 2);
  m.set(3, 5);
  EXPECT_EQ(mask_bounds(m), (BoundingBox{2, 1, 4, 3}));
  BitMask big(5, 7, true);
  EXPECT_TRUE(is_subset(m, big));
  EXPECT_FALSE(is_subset(big, m));
  EXPECT_EQ(intersection_count(m, big), 2u);
}

TEST(Components, EightConnectivityAndLargest) {
  BitMask m(4, 4);
  m.set(0, 0);
  m.set(1, 1);  // diagonal neighbour: same component under 8-connectivity
  m.set(3, 3);
  m.set(3, 2);
  m.set(2, 3);
  const Labeling lab8 = label_components(m, 8);
  EXPECT_EQ(lab8.components.size(), 2u);
  const Labeling lab4 = label_components(m, 4);
  EXPECT_EQ(lab4.components.size(), 3u);
  const BitMask big = largest_component(m);
  EXPECT_EQ(big.count(), 3u);
  EXPECT_TRUE(big.at(3, 3));
}
