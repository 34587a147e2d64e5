#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usdeid/error.hpp"
#include "usdeid/imgbuf.hpp"

// Minimal DICOM Part 10 reader/writer: Explicit VR Little Endian with native
// 8-bit pixel data. Sequences are skipped whole.

namespace usdeid::dicom {

struct Tag {
  std::uint16_t group = 0;
  std::uint16_t element = 0;

  constexpr std::uint32_t key() const { return (std::uint32_t{group} << 16) | element; }
  friend constexpr auto operator<=>(const Tag& a, const Tag& b) { return a.key() <=> b.key(); }
  friend constexpr bool operator==(const Tag&, const Tag&) = default;
};

namespace tags {
inline constexpr Tag transfer_syntax{0x0002, 0x0010};
inline constexpr Tag patient_name{0x0010, 0x0010};
inline constexpr Tag patient_id{0x0010, 0x0020};
inline constexpr Tag samples_per_pixel{0x0028, 0x0002};
inline constexpr Tag photometric{0x0028, 0x0004};
inline constexpr Tag planar_configuration{0x0028, 0x0006};
inline constexpr Tag number_of_frames{0x0028, 0x0008};
inline constexpr Tag rows{0x0028, 0x0010};
inline constexpr Tag columns{0x0028, 0x0011};
inline constexpr Tag bits_allocated{0x0028, 0x0100};
inline constexpr Tag pixel_data{0x7FE0, 0x0010};
}  // namespace tags

inline constexpr std::string_view explicit_vr_little_endian = "1.2.840.10008.1.2.1";

struct DicomElement {
  Tag tag;
  std::array<char, 2> vr{};
  std::vector<std::uint8_t> value;

  std::string_view vr_string() const { return {vr.data(), 2}; }
};

struct PixelMeta {
  int rows = 0;
  int cols = 0;
  int frames = 1;
  int samples_per_pixel = 1;
  int bits_allocated = 8;
  int planar_configuration = 0;
  std::string photometric;

  std::size_t expected_bytes() const {
    return static_cast<std::size_t>(rows) * cols * frames * samples_per_pixel * (bits_allocated / 8);
  }
};

/// Value with trailing space and NUL padding removed.
inline std::string trimmed_string(std::span<const std::uint8_t> v) {
  std::size_t n = v.size();
  while (n > 0 && (v[n - 1] == ' ' || v[n - 1] == '\0')) --n;
  std::size_t b = 0;
  while (b < n && v[b] == ' ') ++b;
  return std::string(v.begin() + b, v.begin() + n);
}

class DicomDataset {
 public:
  std::map<Tag, DicomElement> elements;
  std::optional<PixelMeta> pixel_meta;

  const DicomElement* find(Tag t) const {
    auto it = elements.find(t);
    return it == elements.end() ? nullptr : &it->second;
  }
  std::optional<std::string> string_value(Tag t) const {
    const DicomElement* e = find(t);
    if (!e) return std::nullopt;
    return trimmed_string(e->value);
  }
  std::span<const std::uint8_t> pixel_bytes() const {
    const DicomElement* e = find(tags::pixel_data);
    if (!e || !pixel_meta) return {};
    return std::span<const std::uint8_t>(e->value).first(pixel_meta->expected_bytes());
  }
};

inline bool uses_long_length(std::string_view vr) {
  static constexpr std::array<std::string_view, 13> long_vrs = {"OB", "OD", "OF", "OL", "OV", "OW", "SQ",
                                                                "SV", "UC", "UN", "UR", "UT", "UV"};
  return std::find(long_vrs.begin(), long_vrs.end(), vr) != long_vrs.end();
}

namespace detail {

inline constexpr std::uint32_t undefined_length = 0xFFFFFFFFu;
inline constexpr Tag item{0xFFFE, 0xE000};
inline constexpr Tag item_delimiter{0xFFFE, 0xE00D};
inline constexpr Tag sequence_delimiter{0xFFFE, 0xE0DD};
inline constexpr int max_nesting = 32;

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> b, std::size_t pos) : bytes_(b), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }

  void need(std::size_t n) const {
    if (remaining() < n) throw Error(ErrorKind::corrupt_file, "truncated element at offset " + std::to_string(pos_));
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    const std::uint32_t v = std::uint32_t{bytes_[pos_]} | (std::uint32_t{bytes_[pos_ + 1]} << 8) |
                            (std::uint32_t{bytes_[pos_ + 2]} << 16) | (std::uint32_t{bytes_[pos_ + 3]} << 24);
    pos_ += 4;
    return v;
  }
  Tag tag() {
    const std::uint16_t g = u16();
    const std::uint16_t e = u16();
    return {g, e};
  }
  std::array<char, 2> vr() {
    need(2);
    std::array<char, 2> v{static_cast<char>(bytes_[pos_]), static_cast<char>(bytes_[pos_ + 1])};
    if (v[0] < 'A' || v[0] > 'Z' || v[1] < 'A' || v[1] > 'Z')
      throw Error(ErrorKind::corrupt_file, "invalid VR at offset " + std::to_string(pos_));
    pos_ += 2;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  void skip(std::size_t n) { take(n); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

struct ElementHeader {
  Tag tag;
  std::array<char, 2> vr{};
  std::uint32_t length = 0;
};

inline ElementHeader read_header(Cursor& cur) {
  ElementHeader h;
  h.tag = cur.tag();
  h.vr = cur.vr();
  const std::string_view vr(h.vr.data(), 2);
  if (uses_long_length(vr)) {
    cur.skip(2);
    h.length = cur.u32();
  } else {
    h.length = cur.u16();
  }
  return h;
}

inline void skip_undefined_sequence(Cursor& cur, int depth);

// Body of an undefined-length item: explicit-VR elements up to the item delimiter.
inline void skip_undefined_item(Cursor& cur, int depth) {
  if (depth > max_nesting) throw Error(ErrorKind::corrupt_file, "sequence nesting too deep");
  for (;;) {
    cur.need(4);
    Cursor peek = cur;
    if (peek.tag() == item_delimiter) {
      cur.tag();
      cur.u32();
      return;
    }
    const ElementHeader h = read_header(cur);
    if (h.length == undefined_length) {
      skip_undefined_sequence(cur, depth + 1);
    } else {
      cur.skip(h.length);
    }
  }
}

inline void skip_undefined_sequence(Cursor& cur, int depth) {
  if (depth > max_nesting) throw Error(ErrorKind::corrupt_file, "sequence nesting too deep");
  for (;;) {
    const Tag t = cur.tag();
    const std::uint32_t len = cur.u32();
    if (t == sequence_delimiter) return;
    if (t != item) throw Error(ErrorKind::corrupt_file, "expected sequence item");
    if (len == undefined_length) {
      skip_undefined_item(cur, depth + 1);
    } else {
      cur.skip(len);
    }
  }
}

inline int read_us(const DicomDataset& ds, Tag t, bool required, int fallback = 0) {
  const DicomElement* e = ds.find(t);
  if (!e) {
    if (required) throw Error(ErrorKind::corrupt_file, "missing required pixel attribute");
    return fallback;
  }
  if (e->value.size() != 2) throw Error(ErrorKind::corrupt_file, "US attribute must hold 2 bytes");
  return e->value[0] | (e->value[1] << 8);
}

inline PixelMeta derive_pixel_meta(const DicomDataset& ds) {
  PixelMeta m;
  m.rows = read_us(ds, tags::rows, true);
  m.cols = read_us(ds, tags::columns, true);
  m.samples_per_pixel = read_us(ds, tags::samples_per_pixel, true);
  m.bits_allocated = read_us(ds, tags::bits_allocated, true);
  m.planar_configuration = read_us(ds, tags::planar_configuration, false, 0);
  const auto photometric = ds.string_value(tags::photometric);
  if (!photometric) throw Error(ErrorKind::corrupt_file, "missing PhotometricInterpretation");
  m.photometric = *photometric;
  if (m.bits_allocated != 8)
    throw Error(ErrorKind::unsupported_depth, "BitsAllocated " + std::to_string(m.bits_allocated) + " not supported");
  if (auto frames = ds.string_value(tags::number_of_frames)) {
    if (frames->empty() || frames->size() > 9 ||
        !std::all_of(frames->begin(), frames->end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw Error(ErrorKind::corrupt_file, "NumberOfFrames is not a positive integer");
    m.frames = std::stoi(*frames);
  }
  if (m.rows < 1 || m.cols < 1 || m.frames < 1 || m.samples_per_pixel < 1 || m.samples_per_pixel > 4)
    throw Error(ErrorKind::corrupt_file, "pixel dimensions out of range");
  const std::size_t expected = m.expected_bytes();
  const std::size_t actual = ds.find(tags::pixel_data)->value.size();
  const bool padded = (expected % 2 == 1) && actual == expected + 1;
  if (actual != expected && !padded)
    throw Error(ErrorKind::corrupt_file, "PixelData length " + std::to_string(actual) + " != expected " +
                                             std::to_string(expected));
  return m;
}

}  // namespace detail

inline bool has_dicm_magic(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 132 && bytes[128] == 'D' && bytes[129] == 'I' && bytes[130] == 'C' && bytes[131] == 'M';
}

/// Parse a Part 10 file. Throws Error with kind not_dicom,
/// unsupported_transfer_syntax, unsupported_depth or corrupt_file.
inline DicomDataset parse(std::span<const std::uint8_t> bytes) {
  using namespace detail;
  if (!has_dicm_magic(bytes)) throw Error(ErrorKind::not_dicom, "missing DICM magic at offset 128");

  DicomDataset ds;
  Cursor cur(bytes, 132);
  std::optional<Tag> previous;
  bool syntax_checked = false;
  auto check_syntax = [&] {
    if (syntax_checked) return;
    syntax_checked = true;
    if (auto ts = ds.string_value(tags::transfer_syntax); ts && *ts != explicit_vr_little_endian)
      throw Error(ErrorKind::unsupported_transfer_syntax, "transfer syntax " + *ts);
  };

  while (!cur.at_end()) {
    const ElementHeader h = read_header(cur);
    if (previous && !(*previous < h.tag)) throw Error(ErrorKind::corrupt_file, "tags out of order");
    if (h.tag.group == 0xFFFE) throw Error(ErrorKind::corrupt_file, "item tag outside a sequence");
    previous = h.tag;
    if (h.tag.group > 0x0002) check_syntax();

    const std::string_view vr(h.vr.data(), 2);
    if (h.length == undefined_length) {
      if (h.tag == tags::pixel_data)
        throw Error(ErrorKind::unsupported_transfer_syntax, "encapsulated PixelData");
      if (vr != "SQ" && vr != "UN") throw Error(ErrorKind::corrupt_file, "undefined length on non-sequence");
      skip_undefined_sequence(cur, 0);
      continue;
    }
    if (vr == "SQ") {
      cur.skip(h.length);
      continue;
    }
    const auto value = cur.take(h.length);
    ds.elements.emplace(h.tag, DicomElement{h.tag, h.vr, std::vector<std::uint8_t>(value.begin(), value.end())});
  }
  check_syntax();

  if (ds.find(tags::pixel_data)) ds.pixel_meta = derive_pixel_meta(ds);
  return ds;
}

/// Split pixel data into frames. MONOCHROME2 gives gray frames, RGB with
/// planar configuration 0 gives colour frames.
inline FrameStack to_stack(const DicomDataset& ds, std::string source_id) {
  if (!ds.pixel_meta) throw Error(ErrorKind::unsupported, "dataset has no PixelData");
  const PixelMeta& m = *ds.pixel_meta;
  const auto pixels = ds.pixel_bytes();
  const std::size_t plane = static_cast<std::size_t>(m.rows) * m.cols;
  if (m.photometric == "MONOCHROME2" && m.samples_per_pixel == 1) {
    std::vector<GrayImage> frames;
    for (int f = 0; f < m.frames; ++f) {
      auto first = pixels.begin() + static_cast<std::ptrdiff_t>(f * plane);
      frames.emplace_back(m.rows, m.cols, std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(plane)));
    }
    return FrameStack(std::move(source_id), std::move(frames));
  }
  if (m.photometric == "RGB" && m.samples_per_pixel == 3 && m.planar_configuration == 0) {
    std::vector<RgbImage> frames;
    const std::size_t stride = plane * 3;
    for (int f = 0; f < m.frames; ++f) {
      auto first = pixels.begin() + static_cast<std::ptrdiff_t>(f * stride);
      frames.emplace_back(m.rows, m.cols, std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(stride)));
    }
    return FrameStack(std::move(source_id), std::move(frames));
  }
  throw Error(ErrorKind::unsupported, "photometric interpretation " + m.photometric + " with " +
                                          std::to_string(m.samples_per_pixel) + " samples");
}

/// Builds Explicit VR Little Endian files. Elements may be added in any
/// order; they are emitted sorted by tag with a computed group length.
class Writer {
 public:
  void add(Tag tag, std::string_view vr, std::vector<std::uint8_t> value) {
    if (value.size() % 2 == 1) value.push_back(vr == "UI" ? 0 : (is_text(vr) ? ' ' : 0));
    elements_[tag] = {std::string(vr), std::move(value)};
  }
  void add_string(Tag tag, std::string_view vr, std::string_view s) {
    add(tag, vr, std::vector<std::uint8_t>(s.begin(), s.end()));
  }
  void add_us(Tag tag, std::uint16_t v) {
    add(tag, "US", {static_cast<std::uint8_t>(v & 0xFF), static_cast<std::uint8_t>(v >> 8)});
  }

  std::vector<std::uint8_t> bytes() const {
    std::vector<std::uint8_t> meta_body;
    std::vector<std::uint8_t> body;
    for (const auto& [tag, e] : elements_) {
      if (tag == Tag{0x0002, 0x0000}) continue;
      emit(tag.group == 0x0002 ? meta_body : body, tag, e.vr, e.value);
    }
    std::vector<std::uint8_t> out(128, 0);
    out.insert(out.end(), {'D', 'I', 'C', 'M'});
    const auto len = static_cast<std::uint32_t>(meta_body.size());
    emit(out, {0x0002, 0x0000}, "UL",
         {static_cast<std::uint8_t>(len), static_cast<std::uint8_t>(len >> 8), static_cast<std::uint8_t>(len >> 16),
          static_cast<std::uint8_t>(len >> 24)});
    out.insert(out.end(), meta_body.begin(), meta_body.end());
    out.insert(out.end(), body.begin(), body.end());
    return out;
  }

 private:
  struct Entry {
    std::string vr;
    std::vector<std::uint8_t> value;
  };

  static bool is_text(std::string_view vr) {
    static constexpr std::array<std::string_view, 16> text = {"AE", "AS", "CS", "DA", "DS", "DT", "IS", "LO",
                                                              "LT", "PN", "SH", "ST", "TM", "UC", "UR", "UT"};
    return std::find(text.begin(), text.end(), vr) != text.end();
  }

  static void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  }

  static void emit(std::vector<std::uint8_t>& out, Tag tag, std::string_view vr, const std::vector<std::uint8_t>& v) {
    put16(out, tag.group);
    put16(out, tag.element);
    out.push_back(static_cast<std::uint8_t>(vr[0]));
    out.push_back(static_cast<std::uint8_t>(vr[1]));
    if (uses_long_length(vr)) {
      put16(out, 0);
      const auto n = static_cast<std::uint32_t>(v.size());
      put16(out, static_cast<std::uint16_t>(n & 0xFFFF));
      put16(out, static_cast<std::uint16_t>(n >> 16));
    } else {
      put16(out, static_cast<std::uint16_t>(v.size()));
    }
    out.insert(out.end(), v.begin(), v.end());
  }

  std::map<Tag, Entry> elements_;
};

}  // namespace usdeid::dicom
