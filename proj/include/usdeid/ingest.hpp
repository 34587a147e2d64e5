#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "usdeid/csv.hpp"
#include "usdeid/dicom.hpp"
#include "usdeid/error.hpp"
#include "usdeid/imgbuf.hpp"
#include "usdeid/png_io.hpp"
#include "usdeid/pnm.hpp"

namespace usdeid::ingest {

namespace fs = std::filesystem;

using AnyImage = std::variant<GrayImage, RgbImage>;

inline std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline dicom::DicomDataset parse_dicom(std::span<const std::uint8_t> bytes) { return dicom::parse(bytes); }

inline FrameStack dataset_to_stack(const dicom::DicomDataset& ds, std::string source_id) {
  return dicom::to_stack(ds, std::move(source_id));
}

inline GrayImage read_pgm(std::span<const std::uint8_t> bytes) { return pnm::read_pgm(bytes); }

/// Decode a PGM/PPM or PNG buffer by signature.
inline AnyImage decode_image(std::span<const std::uint8_t> bytes) {
  if (pnm::looks_like_pnm(bytes)) return pnm::read(bytes);
  if (png::looks_like_png(bytes)) return png::read(bytes);
  throw Error(ErrorKind::unsupported, "unrecognised image format");
}

inline AnyImage read_image(const fs::path& path) { return decode_image(read_bytes(path)); }

inline FrameStack single_frame(AnyImage img, std::string source_id) {
  return std::visit(
      [&](auto& frame) {
        using Img = std::decay_t<decltype(frame)>;
        std::vector<Img> frames;
        frames.push_back(std::move(frame));
        return FrameStack(std::move(source_id), std::move(frames));
      },
      img);
}

/// Regular, non-hidden files in lexicographic filename order.
inline std::vector<fs::path> sorted_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

/// A directory of equally sized single images, taken as consecutive frames.
inline FrameStack read_frame_dir(const fs::path& dir) {
  const auto files = sorted_files(dir);
  if (files.empty()) throw Error(ErrorKind::unsupported, "frame directory is empty");
  std::vector<AnyImage> images;
  for (const auto& f : files) images.push_back(read_image(f));
  const std::string id = dir.filename().string();
  if (std::holds_alternative<GrayImage>(images.front())) {
    std::vector<GrayImage> frames;
    for (auto& img : images) {
      auto* g = std::get_if<GrayImage>(&img);
      if (!g) throw Error(ErrorKind::dimension_mismatch, "frame channel counts differ");
      frames.push_back(std::move(*g));
    }
    return FrameStack(id, std::move(frames));
  }
  std::vector<RgbImage> frames;
  for (auto& img : images) {
    auto* c = std::get_if<RgbImage>(&img);
    if (!c) throw Error(ErrorKind::dimension_mismatch, "frame channel counts differ");
    frames.push_back(std::move(*c));
  }
  return FrameStack(id, std::move(frames));
}

enum class InputKind { dicom, pnm, png, frame_dir };

struct LoadedInput {
  FrameStack stack;
  std::optional<dicom::DicomDataset> dataset;
  InputKind kind;
  std::uintmax_t bytes_on_disk = 0;
};

inline std::uintmax_t disk_size(const fs::path& path) {
  if (!fs::is_directory(path)) return fs::file_size(path);
  std::uintmax_t total = 0;
  for (const auto& f : sorted_files(path)) total += fs::file_size(f);
  return total;
}

/// Load any supported input: DICOM, PGM/PPM, PNG or a frame directory.
/// The stack's source_id is the file or directory name.
inline LoadedInput load(const fs::path& path) {
  const std::string id = path.filename().string();
  if (fs::is_directory(path)) return {read_frame_dir(path), std::nullopt, InputKind::frame_dir, disk_size(path)};
  const auto bytes = read_bytes(path);
  const auto size = static_cast<std::uintmax_t>(bytes.size());
  if (dicom::has_dicm_magic(bytes)) {
    auto ds = parse_dicom(bytes);
    auto stack = dataset_to_stack(ds, id);
    return {std::move(stack), std::move(ds), InputKind::dicom, size};
  }
  if (pnm::looks_like_pnm(bytes)) return {single_frame(pnm::read(bytes), id), std::nullopt, InputKind::pnm, size};
  if (png::looks_like_png(bytes)) return {single_frame(png::read(bytes), id), std::nullopt, InputKind::png, size};
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".dcm" || ext == ".dicom") throw Error(ErrorKind::not_dicom, "missing DICM magic at offset 128");
  throw Error(ErrorKind::unsupported, "unsupported input format");
}

struct HeaderRow {
  std::string tag;
  std::string vr;
  std::string value;

  friend bool operator==(const HeaderRow&, const HeaderRow&) = default;
};

inline std::string format_tag(dicom::Tag t) {
  char buf[10];
  std::snprintf(buf, sizeof buf, "%04X,%04X", t.group, t.element);
  return buf;
}

namespace detail {

inline std::string escape_bytes(std::span<const std::uint8_t> v) {
  std::string out;
  for (std::uint8_t b : v) {
    if (b >= 0x20 && b < 0x7F) {
      out.push_back(static_cast<char>(b));
    } else {
      char buf[5];
      std::snprintf(buf, sizeof buf, "\\x%02X", b);
      out += buf;
    }
  }
  return out;
}

template <class T>
std::string join_numbers(std::span<const std::uint8_t> v) {
  std::string out;
  for (std::size_t i = 0; i + sizeof(T) <= v.size(); i += sizeof(T)) {
    T x;
    std::memcpy(&x, v.data() + i, sizeof(T));  // host is little-endian
    if (!out.empty()) out.push_back('\\');
    if constexpr (std::is_floating_point_v<T>) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(x));
      out += buf;
    } else {
      out += std::to_string(x);
    }
  }
  return out;
}

}  // namespace detail

/// Text rendering of an element value: numbers for binary numeric VRs,
/// otherwise the bytes with padding trimmed and non-printables hex-escaped.
inline std::string render_value(const dicom::DicomElement& e) {
  const std::string_view vr = e.vr_string();
  const std::span<const std::uint8_t> v = e.value;
  if (vr == "US") return detail::join_numbers<std::uint16_t>(v);
  if (vr == "SS") return detail::join_numbers<std::int16_t>(v);
  if (vr == "UL") return detail::join_numbers<std::uint32_t>(v);
  if (vr == "SL") return detail::join_numbers<std::int32_t>(v);
  if (vr == "FL") return detail::join_numbers<float>(v);
  if (vr == "FD") return detail::join_numbers<double>(v);
  if (vr == "OB" || vr == "OW" || vr == "UN" || vr == "OF" || vr == "OD" || vr == "OL") return detail::escape_bytes(v);
  std::size_t n = v.size();
  while (n > 0 && (v[n - 1] == ' ' || v[n - 1] == '\0')) --n;
  return detail::escape_bytes(v.first(n));
}

/// One row per element except PixelData, in tag order.
inline std::vector<HeaderRow> extract_header_csv(const dicom::DicomDataset& ds) {
  std::vector<HeaderRow> rows;
  for (const auto& [tag, e] : ds.elements) {
    if (tag == dicom::tags::pixel_data) continue;
    rows.push_back({format_tag(tag), std::string(e.vr_string()), render_value(e)});
  }
  return rows;
}

inline void write_header_csv(std::ostream& os, const std::vector<HeaderRow>& rows) {
  csv::write_row(os, {"tag", "vr", "value"});
  for (const auto& r : rows) csv::write_row(os, {r.tag, r.vr, r.value});
}

}  // namespace usdeid::ingest
