#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "usdeid/ingest.hpp"
#include "usdeid/pnm.hpp"
#include "usdeid/png_io.hpp"
#include "usdeid/synth.hpp"

using namespace usdeid;
namespace fs = std::filesystem;

namespace {

FrameStack gray_stack(int rows, int cols, int frames, std::uint64_t seed) {
  oracle::Gen g(seed);
  std::vector<GrayImage> v;
  for (int f = 0; f < frames; ++f) {
    GrayImage img(rows, cols);
    for (auto& p : img.data()) p = static_cast<std::uint8_t>(g.integer(0, 255));
    v.push_back(std::move(img));
  }
  return FrameStack("x.dcm", std::move(v));
}

FrameStack rgb_stack(int rows, int cols, int frames, std::uint64_t seed) {
  oracle::Gen g(seed);
  std::vector<RgbImage> v;
  for (int f = 0; f < frames; ++f) {
    RgbImage img(rows, cols);
    for (auto& p : img.data()) p = static_cast<std::uint8_t>(g.integer(0, 255));
    v.push_back(std::move(img));
  }
  return FrameStack("x.dcm", std::move(v));
}

FrameStack decode(std::span<const std::uint8_t> bytes) {
  return ingest::dataset_to_stack(ingest::parse_dicom(bytes), "x.dcm");
}

ErrorKind kind_of(std::span<const std::uint8_t> bytes) {
  try {
    decode(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::io_error;
}

// Minimal single-frame dataset with a caller-chosen twist.
dicom::Writer base_writer(int rows, int cols) {
  namespace t = dicom::tags;
  dicom::Writer w;
  w.add_string(t::transfer_syntax, "UI", dicom::explicit_vr_little_endian);
  w.add_us(t::samples_per_pixel, 1);
  w.add_string(t::photometric, "CS", "MONOCHROME2");
  w.add_us(t::rows, static_cast<std::uint16_t>(rows));
  w.add_us(t::columns, static_cast<std::uint16_t>(cols));
  w.add_us(t::bits_allocated, 8);
  w.add(t::pixel_data, "OB", std::vector<std::uint8_t>(static_cast<std::size_t>(rows * cols), 7));
  return w;
}

void write_all(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                           static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST(Dicom, RoundTripGrayIsBitExact) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const FrameStack s = gray_stack(5 + static_cast<int>(seed), 7, static_cast<int>(seed), seed);
    EXPECT_EQ(decode(synth::author_dicom(s)), s);
  }
}

TEST(Dicom, RoundTripRgbIsBitExact) {
  const FrameStack s = rgb_stack(4, 3, 2, 9);
  EXPECT_EQ(decode(synth::author_dicom(s)), s);
}

TEST(Dicom, OddPixelCountIsPadded) {
  const FrameStack s = gray_stack(3, 3, 1, 4);
  const auto bytes = synth::author_dicom(s);
  EXPECT_EQ(bytes.size() % 2, 0u);
  EXPECT_EQ(decode(bytes), s);
}

TEST(Dicom, NumberOfFramesDefaultsToOne) {
  const auto bytes = base_writer(2, 4).bytes();
  const FrameStack s = decode(bytes);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(s.gray(0).at(1, 3), 7);
}

TEST(Dicom, MissingMagicIsNotDicom) {
  std::vector<std::uint8_t> bytes(200, 0);
  EXPECT_EQ(kind_of(bytes), ErrorKind::not_dicom);
  EXPECT_FALSE(dicom::has_dicm_magic(std::vector<std::uint8_t>(131, 0)));
}

TEST(Dicom, ImplicitTransferSyntaxRejected) {
  auto w = base_writer(2, 2);
  w.add_string(dicom::tags::transfer_syntax, "UI", "1.2.840.10008.1.2");
  EXPECT_EQ(kind_of(w.bytes()), ErrorKind::unsupported_transfer_syntax);
}

TEST(Dicom, SixteenBitRejected) {
  auto w = base_writer(2, 2);
  w.add_us(dicom::tags::bits_allocated, 16);
  w.add(dicom::tags::pixel_data, "OW", std::vector<std::uint8_t>(8, 1));
  EXPECT_EQ(kind_of(w.bytes()), ErrorKind::unsupported_depth);
}

TEST(Dicom, EncapsulatedPixelDataRejected) {
  auto bytes = base_writer(2, 2).bytes();
  // Rewrite the PixelData length field to the undefined-length marker.
  const std::size_t len_at = bytes.size() - 4 - 4;
  for (int i = 0; i < 4; ++i) bytes[len_at + static_cast<std::size_t>(i)] = 0xFF;
  EXPECT_EQ(kind_of(bytes), ErrorKind::unsupported_transfer_syntax);
}

TEST(Dicom, PixelLengthMismatchIsCorrupt) {
  auto w = base_writer(2, 2);
  w.add(dicom::tags::pixel_data, "OB", std::vector<std::uint8_t>(6, 0));
  EXPECT_EQ(kind_of(w.bytes()), ErrorKind::corrupt_file);
}

TEST(Dicom, MissingPixelDataIsError) {
  dicom::Writer w;
  w.add_string(dicom::tags::transfer_syntax, "UI", dicom::explicit_vr_little_endian);
  w.add_string(dicom::tags::patient_name, "PN", "A^B");
  const auto ds = ingest::parse_dicom(w.bytes());
  EXPECT_FALSE(ds.pixel_meta);
  EXPECT_THROW(ingest::dataset_to_stack(ds, "x"), Error);
}

TEST(Dicom, BadNumberOfFramesIsCorrupt) {
  auto w = base_writer(2, 2);
  w.add_string(dicom::tags::number_of_frames, "IS", "x1");
  EXPECT_EQ(kind_of(w.bytes()), ErrorKind::corrupt_file);
}

TEST(Dicom, FuzzTruncationsAlwaysClassified) {
  const auto bytes = synth::author_dicom(gray_stack(6, 5, 2, 21));
  oracle::Gen g(22);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(g.integer(0, static_cast<int>(bytes.size()) - 1));
    const std::span<const std::uint8_t> cut(bytes.data(), n);
    try {
      decode(cut);
      FAIL() << "truncation to " << n << " bytes decoded";
    } catch (const Error&) {
    } catch (const std::exception& e) {
      FAIL() << "unclassified exception at " << n << ": " << e.what();
    }
  }
}

TEST(Dicom, FuzzCorruptionsNeverEscape) {
  const auto clean = synth::author_dicom(gray_stack(6, 5, 2, 31));
  oracle::Gen g(32);
  int errors = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto bytes = clean;
    const int flips = g.integer(1, 8);
    for (int i = 0; i < flips; ++i)
      bytes[static_cast<std::size_t>(g.integer(128, static_cast<int>(bytes.size()) - 1))] =
          static_cast<std::uint8_t>(g.integer(0, 255));
    try {
      const FrameStack s = decode(bytes);
      EXPECT_GE(s.size(), 1u);
    } catch (const Error&) {
      ++errors;
    } catch (const std::exception& e) {
      FAIL() << "unclassified exception: " << e.what();
    }
  }
  EXPECT_GT(errors, 0);
}

TEST(Header, RowsExcludePixelData) {
  synth::PatientFields p;
  p.name = "DOE^JANE";
  const auto ds = ingest::parse_dicom(synth::author_dicom(gray_stack(4, 4, 3, 5), p));
  const auto rows = ingest::extract_header_csv(ds);
  bool found_name = false;
  for (const auto& r : rows) {
    EXPECT_NE(r.tag, "7FE0,0010");
    if (r.tag == "0010,0010") {
      found_name = true;
      EXPECT_EQ(r, (ingest::HeaderRow{"0010,0010", "PN", "DOE^JANE"}));
    }
    if (r.tag == "0028,0010") {
      EXPECT_EQ(r.value, "4");
    }
    if (r.tag == "0028,0008") {
      EXPECT_EQ(r.value, "3");
    }
  }
  EXPECT_TRUE(found_name);
  std::ostringstream os;
  ingest::write_header_csv(os, rows);
  EXPECT_EQ(os.str().rfind("tag,vr,value\r\n", 0), 0u);
  EXPECT_NE(os.str().find("0010,0010"), std::string::npos);
}

TEST(Pnm, RoundTrip) {
  const FrameStack g = gray_stack(3, 5, 1, 2);
  const GrayImage img = g.gray(0);
  EXPECT_EQ(pnm::read_pgm(pnm::write(img)), img);
  RgbImage c(2, 3);
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] = static_cast<std::uint8_t>(i * 13);
  EXPECT_EQ(std::get<RgbImage>(pnm::read(pnm::write(c))), c);
}

TEST(Pnm, HeaderCommentsAndTruncation) {
  const std::string text = "P5\n# comment\n2 1\n255\n";
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  bytes.push_back(9);
  EXPECT_THROW(pnm::read(bytes), Error);
  bytes.push_back(8);
  const GrayImage img = pnm::read_pgm(bytes);
  EXPECT_EQ(img.at(0, 0), 9);
  EXPECT_EQ(img.at(0, 1), 8);
}

TEST(Png, RoundTrip) {
  const GrayImage img = gray_stack(6, 4, 1, 8).gray(0);
  const auto bytes = png::write(img);
  EXPECT_TRUE(png::looks_like_png(bytes));
  EXPECT_EQ(std::get<GrayImage>(png::read(bytes)), img);
}

TEST(Load, DispatchesByContent) {
  oracle::TempDir dir("ingest");
  const FrameStack s = gray_stack(4, 4, 2, 1);
  write_all(dir / "a.dcm", synth::author_dicom(s));
  write_all(dir / "b.pgm", pnm::write(s.gray(0)));
  write_all(dir / "c.dcm", std::vector<std::uint8_t>(50, 1));

  const auto a = ingest::load(dir / "a.dcm");
  EXPECT_EQ(a.kind, ingest::InputKind::dicom);
  EXPECT_TRUE(a.dataset);
  EXPECT_EQ(a.stack.size(), 2u);
  EXPECT_EQ(a.stack.source_id(), "a.dcm");

  const auto b = ingest::load(dir / "b.pgm");
  EXPECT_EQ(b.kind, ingest::InputKind::pnm);
  EXPECT_EQ(b.stack.gray(0), s.gray(0));

  try {
    ingest::load(dir / "c.dcm");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_dicom);
  }
}

TEST(Load, FrameDirectoryOrderAndMismatch) {
  oracle::TempDir dir("frames");
  fs::create_directories(dir / "clip");
  const FrameStack s = gray_stack(3, 3, 3, 6);
  for (int f = 0; f < 3; ++f) write_all(dir / "clip" / ("f" + std::to_string(2 - f) + ".pgm"), pnm::write(s.gray(static_cast<std::size_t>(2 - f))));
  const auto clip = ingest::load(dir / "clip");
  EXPECT_EQ(clip.kind, ingest::InputKind::frame_dir);
  ASSERT_EQ(clip.stack.size(), 3u);
  for (std::size_t f = 0; f < 3; ++f) EXPECT_EQ(clip.stack.gray(f), s.gray(f));

  write_all(dir / "clip" / "f9.pgm", pnm::write(GrayImage(2, 3)));
  try {
    ingest::load(dir / "clip");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
  }
}
