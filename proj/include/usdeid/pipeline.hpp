#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "usdeid/config.hpp"
#include "usdeid/csv.hpp"
#include "usdeid/error.hpp"
#include "usdeid/imgbuf.hpp"
#include "usdeid/ingest.hpp"
#include "usdeid/metrics.hpp"
#include "usdeid/png_io.hpp"
#include "usdeid/pnm.hpp"
#include "usdeid/roi.hpp"
#include "usdeid/textmask.hpp"

namespace usdeid::pipeline {

namespace fs = std::filesystem;

enum class Mode { deid, deid_clean, deid_one, deid_us, find_txt, convert };

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::deid: return "deid";
    case Mode::deid_clean: return "deid_clean";
    case Mode::deid_one: return "deid_one";
    case Mode::deid_us: return "deid_us";
    case Mode::find_txt: return "find_txt";
    case Mode::convert: return "convert";
  }
  return "?";
}

enum class ImageFormat { png, pnm };

struct JobConfig {
  fs::path input_path;
  fs::path output_path;
  Mode mode = Mode::deid_us;
  bool rename_files = false;
  Tunables tunables;  // tunables.threshold() is the background threshold
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;  // 0: one worker per logical CPU
  ImageFormat format = ImageFormat::png;
  bool keep_masks = false;  // retain each file's ROI mask in the result
  std::shared_ptr<const textmask::Recognizer> recognizer;  // null: template font matcher
};

struct ProcessedFile {
  std::string source_id;
  std::string output_id;
  std::size_t frames = 0;
  std::uint64_t before_bytes = 0;       // input size on disk
  std::uint64_t raw_pixel_bytes = 0;    // decoded input pixels
  std::uint64_t after_image_bytes = 0;  // written frames
  std::uint64_t after_meta_bytes = 0;   // written header CSV
  bool fallback = false;
  std::optional<BoundingBox> crop;
  std::optional<roi::RoiShape> shape;
  std::optional<BitMask> roi_mask;
  std::vector<fs::path> outputs;

  std::uint64_t after_bytes() const { return after_image_bytes + after_meta_bytes; }
};

struct SkippedFile {
  std::string source_id;
  ErrorKind reason;
  std::string detail;
};

struct JobResult {
  std::vector<ProcessedFile> processed;
  std::vector<SkippedFile> skipped;
  std::vector<textmask::TextRecord> records;
  fs::path text_csv;

  /// Totals over processed files; nullopt when nothing was read.
  std::optional<metrics::CompressionReport> report() const {
    std::uint64_t before = 0, image = 0, meta = 0;
    for (const auto& p : processed) {
      before += p.before_bytes;
      image += p.after_image_bytes;
      meta += p.after_meta_bytes;
    }
    if (before == 0) return std::nullopt;
    return metrics::compression_report(before, image, meta);
  }
};

// --- naming ---------------------------------------------------------------

inline constexpr std::string_view alphanumerics = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

/// Ten uniformly drawn alphanumerics.
inline std::string random_name(std::mt19937_64& rng) {
  std::string out(10, ' ');
  for (char& c : out) c = alphanumerics[static_cast<std::size_t>(rng() % alphanumerics.size())];
  return out;
}

inline std::string stem_of(const fs::path& p) {
  return fs::is_directory(p) ? p.filename().string() : p.stem().string();
}

inline std::string frame_name(const std::string& id, std::size_t index, ImageFormat fmt, int channels) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%04zu", index);
  const char* ext = fmt == ImageFormat::png ? ".png" : (channels == 1 ? ".pgm" : ".ppm");
  return id + buf + ext;
}

inline std::string header_name(const std::string& id) { return id + "_hdr.csv"; }

inline std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// --- per-file processing --------------------------------------------------

namespace detail {

inline std::uint64_t write_file(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + p.string());
  return fs::file_size(p);
}

inline FrameStack zero_outside_all(const FrameStack& s, const BitMask& keep) {
  return s.map_frames([&](const auto& f) { return zero_outside(f, keep); });
}

inline FrameStack crop_all(const FrameStack& s, const BoundingBox& box) {
  return s.map_frames([&](const auto& f) { return crop(f, box); });
}

/// Single most salient object: largest component after threshold + close.
inline BitMask salient_object(const FrameStack& s, const roi::RoiConfig& cfg) {
  const GrayImage proj = max_projection(s);
  const double sigma = roi::adaptive_sigma(proj.rows(), proj.cols(), cfg);
  const BitMask closed = roi::close(roi::threshold(proj, cfg.threshold), roi::StructElem{roi::disk_radius_for(sigma)});
  return largest_component(closed);
}

inline BitMask content_mask(const FrameStack& s, const roi::RoiConfig& cfg) {
  return roi::area_filter(roi::threshold(max_projection(s), cfg.threshold), cfg.area_fraction);
}

struct WorkItem {
  fs::path path;
  std::string source_id;
  std::string output_id;
};

struct Outcome {
  std::optional<ProcessedFile> processed;
  std::optional<SkippedFile> skipped;
  std::vector<textmask::TextRecord> records;
};

inline Outcome process(const WorkItem& item, const JobConfig& cfg, const textmask::Recognizer& rec) {
  Outcome out;
  ProcessedFile pf;
  pf.source_id = item.source_id;
  pf.output_id = item.output_id;
  try {
    ingest::LoadedInput in = ingest::load(item.path);
    in.stack.set_source_id(item.source_id);
    pf.frames = in.stack.size();
    pf.before_bytes = in.bytes_on_disk;
    pf.raw_pixel_bytes = in.stack.raw_bytes();
    const Tunables& t = cfg.tunables;

    FrameStack result = in.stack;
    if (cfg.mode != Mode::convert) {
      textmask::TextScan scan = textmask::scan_text(in.stack, rec, t.overlay, t.detect);
      out.records = std::move(scan.records);
      result = textmask::mask_text(in.stack, scan.boxes);
    }
    switch (cfg.mode) {
      case Mode::deid:
      case Mode::convert:
      case Mode::find_txt:
        break;
      case Mode::deid_clean:
        result = zero_outside_all(result, content_mask(result, t.roi));
        break;
      case Mode::deid_one: {
        const BitMask keep = salient_object(result, t.roi);
        if (keep.empty()) throw Error(ErrorKind::empty_roi, "no foreground above threshold");
        pf.crop = mask_bounds(keep);
        if (cfg.keep_masks) pf.roi_mask = keep;
        result = crop_all(zero_outside_all(result, keep), *pf.crop);
        break;
      }
      case Mode::deid_us: {
        roi::RoiResult roi_res = roi::final_roi(result, t.roi);
        pf.fallback = roi_res.fallback;
        pf.shape = roi_res.shape;
        pf.crop = mask_bounds(roi_res.mask);
        result = crop_all(zero_outside_all(result, roi_res.mask), *pf.crop);
        if (cfg.keep_masks) pf.roi_mask = std::move(roi_res.mask);
        break;
      }
    }

    if (cfg.mode != Mode::find_txt) {
      try {
        std::size_t index = 0;
        result.visit([&](const auto& frames) {
          for (const auto& f : frames) {
            const fs::path p = cfg.output_path / frame_name(item.output_id, index++, cfg.format, result.channels());
            const auto bytes = cfg.format == ImageFormat::png ? png::write(f) : pnm::write(f);
            pf.outputs.push_back(p);
            pf.after_image_bytes += write_file(p, bytes);
          }
        });
        if (in.dataset) {
          const fs::path p = cfg.output_path / header_name(item.output_id);
          std::ostringstream csv_text;
          ingest::write_header_csv(csv_text, ingest::extract_header_csv(*in.dataset));
          const std::string s = csv_text.str();
          pf.outputs.push_back(p);
          pf.after_meta_bytes += write_file(p, std::vector<std::uint8_t>(s.begin(), s.end()));
        }
      } catch (...) {
        std::error_code ec;
        for (const auto& p : pf.outputs) fs::remove(p, ec);
        throw;
      }
    }
    out.processed = std::move(pf);
  } catch (const Error& e) {
    out.records.clear();
    out.skipped = SkippedFile{item.source_id, e.kind(), e.what()};
  } catch (const fs::filesystem_error& e) {
    out.records.clear();
    out.skipped = SkippedFile{item.source_id, ErrorKind::io_error, e.what()};
  } catch (const std::exception& e) {
    out.records.clear();
    out.skipped = SkippedFile{item.source_id, ErrorKind::unsupported, e.what()};
  }
  return out;
}

}  // namespace detail

// --- CSV and logs ---------------------------------------------------------

struct CrosswalkEntry {
  std::string source_id;
  std::string output_id;
};

inline std::string format_confidence(double c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.4f", c);
  return buf;
}

/// One row per record in (source, frame, box) order; a source without
/// records still gets one row so the crosswalk stays complete.
inline void write_text_csv(std::ostream& os, const std::vector<textmask::TextRecord>& records,
                           const std::vector<CrosswalkEntry>& crosswalk) {
  csv::write_row(os, {"source_file", "output_file", "frame", "x", "y", "width", "height", "text", "confidence"});
  for (const auto& cw : crosswalk) {
    std::vector<const textmask::TextRecord*> mine;
    for (const auto& r : records)
      if (r.source_id == cw.source_id) mine.push_back(&r);
    std::stable_sort(mine.begin(), mine.end(), [](const auto* a, const auto* b) {
      if (a->frame != b->frame) return a->frame < b->frame;
      if (a->box.y != b->box.y) return a->box.y < b->box.y;
      return a->box.x < b->box.x;
    });
    if (mine.empty()) csv::write_row(os, {cw.source_id, cw.output_id, "", "", "", "", "", "", ""});
    for (const auto* r : mine)
      csv::write_row(os, {cw.source_id, cw.output_id, std::to_string(r->frame), std::to_string(r->box.x),
                          std::to_string(r->box.y), std::to_string(r->box.w), std::to_string(r->box.h), r->text,
                          format_confidence(r->confidence)});
  }
}

inline std::string log_line(const std::string& timestamp, const std::string& source_id, std::string_view outcome) {
  return timestamp + "\t" + source_id + "\t" + std::string(outcome) + "\n";
}

inline std::string processed_outcome(const ProcessedFile& p) { return p.fallback ? "processed-fallback" : "processed"; }

/// Appends every entry of a finished result to processed.log / skipped.log.
inline void write_log(const JobResult& result, const fs::path& output_path) {
  std::ofstream proc(output_path / "processed.log", std::ios::app);
  std::ofstream skip(output_path / "skipped.log", std::ios::app);
  const std::string ts = iso_timestamp();
  for (const auto& p : result.processed) proc << log_line(ts, p.source_id, processed_outcome(p));
  for (const auto& s : result.skipped) skip << log_line(ts, s.source_id, to_string(s.reason));
  if (!proc || !skip) throw Error(ErrorKind::io_error, "cannot write logs in " + output_path.string());
}

// --- run ------------------------------------------------------------------

/// Supported inputs: regular files and frame directories, name order.
inline std::vector<fs::path> list_inputs(const fs::path& dir, const fs::path& exclude) {
  std::vector<fs::path> out;
  std::error_code ec;
  const fs::path excl = fs::weakly_canonical(exclude, ec);
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    if (!entry.is_regular_file() && !entry.is_directory()) continue;
    if (entry.is_directory() && fs::weakly_canonical(entry.path(), ec) == excl) continue;
    out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return out;
}

/// Process every input. Per-file failures become skipped entries; only
/// configuration or run-level I/O problems throw.
inline JobResult run(const JobConfig& cfg) {
  const int thr = cfg.tunables.threshold();
  if (thr < 0 || thr > 255) throw Error(ErrorKind::rejected_input, "threshold must lie in [0, 255]");
  if (!fs::is_directory(cfg.input_path))
    throw Error(ErrorKind::io_error, "input is not a directory: " + cfg.input_path.string());
  fs::create_directories(cfg.output_path);
  if (fs::equivalent(cfg.input_path, cfg.output_path))
    throw Error(ErrorKind::rejected_input, "input and output paths must differ");

  // Names are fixed up front in input order so they do not depend on
  // scheduling.
  const auto inputs = list_inputs(cfg.input_path, cfg.output_path);
  std::mt19937_64 rng(cfg.seed ? *cfg.seed : std::random_device{}());
  std::set<std::string> used;
  std::vector<detail::WorkItem> items;
  std::vector<std::optional<SkippedFile>> early(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string source_id = inputs[i].filename().string();
    std::string id;
    if (cfg.rename_files) {
      do id = random_name(rng);
      while (used.count(id) || fs::exists(cfg.output_path / header_name(id)) ||
             fs::exists(cfg.output_path / frame_name(id, 0, cfg.format, 1)) ||
             fs::exists(cfg.output_path / frame_name(id, 0, cfg.format, 3)));
    } else {
      id = stem_of(inputs[i]);
      const bool clash = used.count(id) > 0 ||
                         (cfg.mode != Mode::find_txt && (fs::exists(cfg.output_path / header_name(id)) ||
                                                         fs::exists(cfg.output_path / frame_name(id, 0, cfg.format, 1)) ||
                                                         fs::exists(cfg.output_path / frame_name(id, 0, cfg.format, 3))));
      if (clash) early[i] = SkippedFile{source_id, ErrorKind::output_collision, "output name '" + id + "' already taken"};
    }
    used.insert(id);
    items.push_back({inputs[i], source_id, id});
  }

  const textmask::TemplateRecognizer default_rec;
  const textmask::Recognizer& rec = cfg.recognizer ? *cfg.recognizer : default_rec;

  // Workers claim items by index; a single committer folds finished items
  // into the result strictly in input order.
  JobResult result;
  std::vector<std::optional<detail::Outcome>> done(items.size());
  std::size_t next_commit = 0;
  std::mutex mu;
  auto commit_ready = [&] {
    while (next_commit < done.size() && done[next_commit]) {
      detail::Outcome& o = *done[next_commit];
      if (o.processed) result.processed.push_back(std::move(*o.processed));
      if (o.skipped) result.skipped.push_back(std::move(*o.skipped));
      for (auto& r : o.records) result.records.push_back(std::move(r));
      done[next_commit].reset();
      ++next_commit;
    }
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < items.size();) {
      detail::Outcome o;
      if (early[i]) o.skipped = std::move(*early[i]);
      else o = detail::process(items[i], cfg, rec);
      std::lock_guard lock(mu);
      done[i] = std::move(o);
      commit_ready();
    }
  };
  unsigned n = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, items.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
  }

  std::vector<CrosswalkEntry> crosswalk;
  for (const auto& p : result.processed) crosswalk.push_back({p.source_id, p.output_id});
  result.text_csv = cfg.output_path / (std::string(mode_name(cfg.mode)) + "_text.csv");
  {
    std::ofstream csv_out(result.text_csv, std::ios::binary | std::ios::trunc);
    write_text_csv(csv_out, result.records, crosswalk);
    if (!csv_out) throw Error(ErrorKind::io_error, "cannot write " + result.text_csv.string());
  }
  write_log(result, cfg.output_path);
  if (const auto report = result.report(); report && cfg.mode != Mode::find_txt) {
    std::ofstream rep(cfg.output_path / (std::string(mode_name(cfg.mode)) + "_report.txt"), std::ios::trunc);
    rep << metrics::render_table(*report);
  }
  return result;
}

}  // namespace usdeid::pipeline
