#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "usdeid/config.hpp"
#include "usdeid/error.hpp"
#include "usdeid/imgbuf.hpp"
#include "usdeid/ingest.hpp"
#include "usdeid/metrics.hpp"
#include "usdeid/pipeline.hpp"
#include "usdeid/png_io.hpp"
#include "usdeid/synth.hpp"

namespace usdeid::cli {

namespace fs = std::filesystem;

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

/// Version of the --json summary layout. Bump on any incompatible change.
inline constexpr int json_schema_version = 1;

namespace detail {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string read_text(const fs::path& p) {
  const auto bytes = ingest::read_bytes(p);
  return {bytes.begin(), bytes.end()};
}

inline GrayImage read_gray(const fs::path& p) {
  return std::visit([](auto&& img) { return to_gray(img); }, ingest::read_image(p));
}

inline BitMask nonzero_mask(const GrayImage& img) {
  BitMask m(img.rows(), img.cols());
  for (std::size_t i = 0; i < m.size(); ++i) m.set_index(i, img.data()[i] != 0);
  return m;
}

inline metrics::Color parse_color(const std::string& s) {
  const auto parts = kv::split(s);
  if (parts.size() != 3) throw UsageError("color must be R,G,B");
  metrics::Color c{};
  for (std::size_t i = 0; i < 3; ++i) {
    const long long v = kv::to_int(parts[i], "color");
    if (v < 0 || v > 255) throw UsageError("color components must lie in [0, 255]");
    c[i] = static_cast<std::uint8_t>(v);
  }
  return c;
}

inline nlohmann::json envelope(std::string_view command) {
  return {{"schema", "usdeid-summary"}, {"schema_version", json_schema_version}, {"command", command}};
}

inline nlohmann::json box_json(const BoundingBox& b) { return {{"x", b.x}, {"y", b.y}, {"width", b.w}, {"height", b.h}}; }

struct PipelineArgs {
  std::string input;
  std::string output;
  bool rename = false;
  std::optional<int> threshold;
  std::optional<std::uint64_t> seed;
  std::string config;
  unsigned jobs = 0;
  bool json = false;
  std::string format = "png";
};

inline void add_pipeline_flags(CLI::App* sub, PipelineArgs& a) {
  sub->add_option("--input", a.input, "Input directory")->required();
  sub->add_option("--output", a.output, "Output directory")->required();
  sub->add_flag("--rename-files", a.rename, "Replace output names with 10 random alphanumerics");
  sub->add_option("--threshold", a.threshold, "Background intensity threshold (default 0)")->check(CLI::Range(0, 255));
  sub->add_option("--seed", a.seed, "Seed for rename randomness");
  sub->add_option("--config", a.config, "Tunables file (key = value lines)");
  sub->add_option("--jobs", a.jobs, "Worker cap (default: logical CPUs)")->check(CLI::NonNegativeNumber);
  sub->add_flag("--json", a.json, "Print a JSON summary");
  sub->add_option("--format", a.format, "Frame format")->check(CLI::IsMember({"png", "pgm"}));
}

inline pipeline::JobConfig job_config(const PipelineArgs& a, pipeline::Mode mode) {
  pipeline::JobConfig cfg;
  cfg.input_path = a.input;
  cfg.output_path = a.output;
  cfg.mode = mode;
  cfg.rename_files = a.rename;
  cfg.seed = a.seed;
  cfg.jobs = a.jobs;
  cfg.format = a.format == "pgm" ? pipeline::ImageFormat::pnm : pipeline::ImageFormat::png;
  try {
    if (!a.config.empty()) cfg.tunables = parse_tunables(read_text(a.config));
    if (a.threshold) cfg.tunables.set_threshold(*a.threshold);
  } catch (const Error& e) {
    throw UsageError(std::string("--config: ") + e.what());
  }
  return cfg;
}

inline int run_pipeline(const PipelineArgs& a, pipeline::Mode mode, std::ostream& out) {
  const pipeline::JobConfig cfg = job_config(a, mode);
  const pipeline::JobResult res = pipeline::run(cfg);
  const auto report = res.report();
  if (a.json) {
    nlohmann::json j = envelope(pipeline::mode_name(mode));
    j["input"] = a.input;
    j["output"] = a.output;
    j["text_csv"] = res.text_csv.string();
    j["processed"] = nlohmann::json::array();
    for (const auto& p : res.processed) {
      nlohmann::json e = {{"source", p.source_id},   {"output", p.output_id},
                          {"frames", p.frames},      {"before_bytes", p.before_bytes},
                          {"after_bytes", p.after_bytes()}, {"fallback", p.fallback}};
      if (p.crop) e["crop"] = box_json(*p.crop);
      if (p.shape) e["shape"] = roi::to_string(p.shape->kind);
      j["processed"].push_back(std::move(e));
    }
    j["skipped"] = nlohmann::json::array();
    for (const auto& s : res.skipped) j["skipped"].push_back({{"source", s.source_id}, {"reason", to_string(s.reason)}});
    j["text_records"] = res.records.size();
    if (report && mode != pipeline::Mode::find_txt)
      j["compression"] = {{"before_bytes", report->before_bytes},
                          {"after_image_bytes", report->after_image_bytes},
                          {"after_meta_bytes", report->after_meta_bytes},
                          {"ratio", report->ratio()}};
    out << j.dump(2) << "\n";
    return exit_ok;
  }
  out << pipeline::mode_name(mode) << ": " << res.processed.size() << " processed, " << res.skipped.size()
      << " skipped, " << res.records.size() << " text records\n";
  for (const auto& s : res.skipped) out << "  skipped " << s.source_id << ": " << s.detail << "\n";
  out << "text csv: " << res.text_csv.string() << "\n";
  if (report && mode != pipeline::Mode::find_txt) out << "\n" << metrics::render_table(*report);
  return exit_ok;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Ultrasound image de-identification toolkit", "usdeid"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "usdeid 0.1.0");

  struct ModeCmd {
    const char* name;
    pipeline::Mode mode;
    const char* help;
  };
  const ModeCmd modes[] = {
      {"deid", pipeline::Mode::deid, "Mask burned-in text, keep full frames"},
      {"deid-clean", pipeline::Mode::deid_clean, "Mask text and remove small features"},
      {"deid-one", pipeline::Mode::deid_one, "Mask text, keep the largest object, crop to it"},
      {"deid-us", pipeline::Mode::deid_us, "Mask text, isolate the ultrasound ROI, crop to it"},
      {"find-txt", pipeline::Mode::find_txt, "Detect and transcribe text only"},
      {"convert", pipeline::Mode::convert, "Convert inputs to lossless frames"},
  };
  std::vector<detail::PipelineArgs> pargs(std::size(modes));
  std::vector<CLI::App*> mode_apps;
  for (std::size_t i = 0; i < std::size(modes); ++i) {
    CLI::App* sub = app.add_subcommand(modes[i].name, modes[i].help);
    detail::add_pipeline_flags(sub, pargs[i]);
    mode_apps.push_back(sub);
  }

  std::string dice_a, dice_b;
  int dice_k = 1;
  bool dice_json = false;
  CLI::App* dice = app.add_subcommand("dice", "Dice score of two label images");
  dice->add_option("pred", dice_a, "Predicted mask image")->required();
  dice->add_option("truth", dice_b, "Reference mask image")->required();
  dice->add_option("--k", dice_k, "Label value to match (default 1)")->check(CLI::Range(0, 255));
  dice->add_flag("--json", dice_json, "Print a JSON summary");

  std::string pair_a, pair_b, pair_out, color1 = "124,252,0", color2 = "255,0,252";
  CLI::App* pair = app.add_subcommand("imshowpair", "Overlay two masks (nonzero = member)");
  pair->add_option("pred", pair_a, "Predicted mask image")->required();
  pair->add_option("truth", pair_b, "Reference mask image")->required();
  pair->add_option("--output", pair_out, "Output PNG")->required();
  pair->add_option("--color1", color1, "Prediction-only color R,G,B");
  pair->add_option("--color2", color2, "Reference-only color R,G,B");

  std::string probe_img;
  int probe_x = 0, probe_y = 0;
  CLI::App* probe = app.add_subcommand("color-select", "Print the pixel value at a point");
  probe->add_option("image", probe_img, "Image file")->required();
  probe->add_option("--x", probe_x, "Column")->required();
  probe->add_option("--y", probe_y, "Row")->required();

  std::vector<std::string> spec_files;
  std::string synth_out, synth_truth;
  std::optional<std::uint64_t> synth_seed;
  int per_kind = 10;
  bool adversarial = false;
  CLI::App* syn = app.add_subcommand("synth", "Generate phantom DICOMs with ground truth");
  syn->add_option("--spec", spec_files, "Phantom spec file(s)");
  syn->add_option("--output", synth_out, "Directory for DICOM files")->required();
  syn->add_option("--truth", synth_truth, "Directory for masks and spec files");
  syn->add_option("--seed", synth_seed, "Generate a random corpus from this seed");
  syn->add_option("--per-kind", per_kind, "Corpus phantoms per shape kind")->check(CLI::Range(1, 1000));
  syn->add_flag("--adversarial", adversarial, "Also emit the corrupted-boundary phantom");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    for (std::size_t i = 0; i < mode_apps.size(); ++i)
      if (mode_apps[i]->parsed()) return detail::run_pipeline(pargs[i], modes[i].mode, out);

    if (dice->parsed()) {
      const double d = metrics::dice_score(detail::read_gray(dice_a), detail::read_gray(dice_b), dice_k);
      if (dice_json) {
        nlohmann::json j = detail::envelope("dice");
        j["k"] = dice_k;
        j["dice"] = d;
        out << j.dump(2) << "\n";
      } else {
        out << metrics::format_score(d) << "\n";
      }
      return exit_ok;
    }
    if (pair->parsed()) {
      const RgbImage img =
          metrics::imshowpair(detail::nonzero_mask(detail::read_gray(pair_a)), detail::nonzero_mask(detail::read_gray(pair_b)),
                              detail::parse_color(color1), detail::parse_color(color2));
      const auto bytes = png::write(img);
      std::ofstream f(pair_out, std::ios::binary);
      f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (!f) throw Error(ErrorKind::io_error, "cannot write " + pair_out);
      return exit_ok;
    }
    if (probe->parsed()) {
      out << metrics::format_tuple(metrics::color_select(ingest::read_image(probe_img), probe_x, probe_y)) << "\n";
      return exit_ok;
    }
    if (syn->parsed()) {
      std::vector<std::pair<std::string, synth::PhantomSpec>> specs;
      try {
        for (const auto& f : spec_files) specs.emplace_back(fs::path(f).stem().string(), synth::from_text(detail::read_text(f)));
      } catch (const Error& e) {
        throw detail::UsageError(std::string("--spec: ") + e.what());
      }
      if (synth_seed) {
        const auto corpus = synth::make_corpus(*synth_seed, per_kind);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
          char name[32];
          std::snprintf(name, sizeof name, "phantom_%03zu", i);
          specs.emplace_back(name, corpus[i]);
        }
      }
      if (adversarial) specs.emplace_back("adversarial", synth::adversarial_spec(synth_seed.value_or(1)));
      if (specs.empty()) throw detail::UsageError("synth needs --spec, --seed or --adversarial");
      fs::create_directories(synth_out);
      if (!synth_truth.empty()) fs::create_directories(synth_truth);
      for (const auto& [name, spec] : specs) {
        const synth::Phantom ph = synth::render(spec);
        const auto bytes = synth::author_dicom(ph.stack, synth::patient_fields(spec));
        std::ofstream f(fs::path(synth_out) / (name + ".dcm"), std::ios::binary);
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw Error(ErrorKind::io_error, "cannot write " + name + ".dcm");
        if (!synth_truth.empty()) {
          const auto mask = png::write(mask_to_image(ph.truth.roi_mask, 1));
          std::ofstream m(fs::path(synth_truth) / (name + "_mask.png"), std::ios::binary);
          m.write(reinterpret_cast<const char*>(mask.data()), static_cast<std::streamsize>(mask.size()));
          std::ofstream s(fs::path(synth_truth) / (name + ".spec"));
          s << synth::to_text(spec);
          if (!m || !s) throw Error(ErrorKind::io_error, "cannot write ground truth for " + name);
        }
      }
      out << "synth: wrote " << specs.size() << " phantom(s) to " << synth_out << "\n";
      return exit_ok;
    }
  } catch (const detail::UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
  return exit_usage;
}

}  // namespace usdeid::cli
