#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usdeid/error.hpp"

// Connectionist temporal classification: the collapse mapping, the forward
// recursion for p(l|y), the negative log-likelihood objective and best-path
// decoding. Label index |L| is the blank.

namespace usdeid::ctc {

using LabelSeq = std::vector<int>;

/// Symbol set L plus a blank that is not a member of L.
class Alphabet {
 public:
  explicit Alphabet(std::string labels, char blank = '-') : labels_(std::move(labels)), blank_(blank) {
    if (labels_.empty()) throw Error(ErrorKind::rejected_input, "alphabet needs at least one label");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == blank_) throw Error(ErrorKind::rejected_input, "blank must not be a label");
      if (labels_.find(labels_[i], i + 1) != std::string::npos)
        throw Error(ErrorKind::rejected_input, "alphabet labels must be distinct");
    }
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t width() const { return labels_.size() + 1; }
  int blank_index() const { return static_cast<int>(labels_.size()); }
  char blank() const { return blank_; }
  char symbol(int i) const { return i == blank_index() ? blank_ : labels_.at(static_cast<std::size_t>(i)); }

  int index_of(char ch) const {
    if (ch == blank_) return blank_index();
    const auto pos = labels_.find(ch);
    return pos == std::string::npos ? -1 : static_cast<int>(pos);
  }

  /// A path over L' (blanks allowed).
  std::vector<int> encode_path(std::string_view path) const {
    std::vector<int> out;
    out.reserve(path.size());
    for (char ch : path) {
      const int i = index_of(ch);
      if (i < 0) throw Error(ErrorKind::rejected_input, std::string("symbol not in alphabet: ") + ch);
      out.push_back(i);
    }
    return out;
  }

  /// A label sequence over L (blanks rejected).
  LabelSeq encode(std::string_view text) const {
    LabelSeq out = encode_path(text);
    for (int i : out)
      if (i == blank_index()) throw Error(ErrorKind::rejected_input, "label sequences cannot contain the blank");
    return out;
  }

  std::string decode(const std::vector<int>& seq) const {
    std::string out;
    out.reserve(seq.size());
    for (int i : seq) out.push_back(symbol(i));
    return out;
  }

 private:
  std::string labels_;
  char blank_;
};

/// T x K matrix of per-timestep distributions over L'; column K-1 is blank.
class ProbMatrix {
 public:
  ProbMatrix(std::size_t timesteps, std::size_t width, std::vector<double> values)
      : t_(timesteps), k_(width), p_(std::move(values)) {
    validate();
  }

  static ProbMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw Error(ErrorKind::rejected_input, "probability matrix needs at least one row");
    std::vector<double> flat;
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) throw Error(ErrorKind::rejected_input, "ragged probability matrix");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return ProbMatrix(rows.size(), rows.front().size(), std::move(flat));
  }

  std::size_t timesteps() const { return t_; }
  std::size_t width() const { return k_; }
  int blank_index() const { return static_cast<int>(k_) - 1; }
  double at(std::size_t t, std::size_t k) const { return p_[t * k_ + k]; }
  std::span<const double> row(std::size_t t) const { return std::span<const double>(p_).subspan(t * k_, k_); }

 private:
  void validate() const {
    if (t_ < 1 || k_ < 2) throw Error(ErrorKind::rejected_input, "probability matrix needs T >= 1 and K >= 2");
    if (p_.size() != t_ * k_) throw Error(ErrorKind::rejected_input, "probability matrix size mismatch");
    for (std::size_t t = 0; t < t_; ++t) {
      double sum = 0.0;
      for (double v : row(t)) {
        if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::rejected_input, "probabilities must be finite and >= 0");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw Error(ErrorKind::rejected_input, "row " + std::to_string(t) + " does not sum to 1");
    }
  }

  std::size_t t_;
  std::size_t k_;
  std::vector<double> p_;
};

/// Mapping B: merge adjacent repeats, then drop blanks.
inline LabelSeq collapse(std::span<const int> path, int blank) {
  LabelSeq out;
  int prev = -1;
  for (int s : path) {
    if (s != prev && s != blank) out.push_back(s);
    prev = s;
  }
  return out;
}

inline std::string collapse(const Alphabet& alphabet, std::string_view path) {
  const auto encoded = alphabet.encode_path(path);
  return alphabet.decode(collapse(encoded, alphabet.blank_index()));
}

/// Minimum number of timesteps any path collapsing to l needs.
inline std::size_t min_path_length(const LabelSeq& l) {
  std::size_t n = l.size();
  for (std::size_t i = 1; i < l.size(); ++i)
    if (l[i] == l[i - 1]) ++n;
  return n;
}

inline constexpr std::size_t log_space_threshold = 100;

namespace detail {

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline void check_labels(const ProbMatrix& y, const LabelSeq& l) {
  for (int s : l)
    if (s < 0 || s >= y.blank_index()) throw Error(ErrorKind::rejected_input, "label index outside L");
}

// Label of state s in the blank-augmented sequence.
inline int augmented(const LabelSeq& l, std::size_t s, int blank) {
  return s % 2 == 0 ? blank : l[s / 2];
}

inline bool can_skip(const LabelSeq& l, std::size_t s) {
  return s % 2 == 1 && s >= 3 && l[s / 2] != l[s / 2 - 1];
}

inline double forward_linear(const ProbMatrix& y, const LabelSeq& l) {
  const int blank = y.blank_index();
  const std::size_t states = 2 * l.size() + 1;
  std::vector<double> alpha(states, 0.0), next(states, 0.0);
  alpha[0] = y.at(0, static_cast<std::size_t>(blank));
  if (states > 1) alpha[1] = y.at(0, static_cast<std::size_t>(l[0]));
  for (std::size_t t = 1; t < y.timesteps(); ++t) {
    for (std::size_t s = 0; s < states; ++s) {
      double a = alpha[s];
      if (s >= 1) a += alpha[s - 1];
      if (can_skip(l, s)) a += alpha[s - 2];
      next[s] = a * y.at(t, static_cast<std::size_t>(augmented(l, s, blank)));
    }
    alpha.swap(next);
  }
  return states > 1 ? alpha[states - 1] + alpha[states - 2] : alpha[0];
}

inline double forward_log(const ProbMatrix& y, const LabelSeq& l) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  const int blank = y.blank_index();
  const std::size_t states = 2 * l.size() + 1;
  auto lg = [&](std::size_t t, int k) { return std::log(y.at(t, static_cast<std::size_t>(k))); };
  std::vector<double> alpha(states, neg_inf), next(states, neg_inf);
  alpha[0] = lg(0, blank);
  if (states > 1) alpha[1] = lg(0, l[0]);
  for (std::size_t t = 1; t < y.timesteps(); ++t) {
    for (std::size_t s = 0; s < states; ++s) {
      double a = alpha[s];
      if (s >= 1) a = log_add(a, alpha[s - 1]);
      if (can_skip(l, s)) a = log_add(a, alpha[s - 2]);
      next[s] = a + lg(t, augmented(l, s, blank));
    }
    alpha.swap(next);
  }
  return states > 1 ? log_add(alpha[states - 1], alpha[states - 2]) : alpha[0];
}

}  // namespace detail

/// log p(l|y); -inf when l is infeasible for y. Runs in log space above
/// log_space_threshold timesteps.
inline double seq_log_probability(const ProbMatrix& y, const LabelSeq& l) {
  detail::check_labels(y, l);
  if (min_path_length(l) > y.timesteps()) return -std::numeric_limits<double>::infinity();
  if (y.timesteps() > log_space_threshold) return detail::forward_log(y, l);
  return std::log(detail::forward_linear(y, l));
}

/// p(l|y): the summed probability of every path that collapses to l.
inline double seq_probability(const ProbMatrix& y, const LabelSeq& l) {
  detail::check_labels(y, l);
  if (min_path_length(l) > y.timesteps()) return 0.0;
  if (y.timesteps() > log_space_threshold) return std::exp(detail::forward_log(y, l));
  return detail::forward_linear(y, l);
}

struct Sample {
  ProbMatrix y;
  LabelSeq label;
};

class InfiniteLossError : public Error {
 public:
  explicit InfiniteLossError(std::size_t index)
      : Error(ErrorKind::infinite_loss, "sample " + std::to_string(index) + " has zero probability"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Objective O = -sum_i ln p(l_i | y_i).
inline double nll_loss(std::span<const Sample> samples) {
  double loss = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double lp = seq_log_probability(samples[i].y, samples[i].label);
    if (!std::isfinite(lp)) throw InfiniteLossError(i);
    loss -= lp;
  }
  return loss;
}

struct Decoded {
  LabelSeq labels;
  double score = 0.0;
};

/// Lexicon-free transcription B(argmax path). Ties resolve to the lowest
/// column, which puts the blank last.
inline Decoded best_path_decode(const ProbMatrix& y) {
  std::vector<int> path;
  path.reserve(y.timesteps());
  double score = 1.0;
  for (std::size_t t = 0; t < y.timesteps(); ++t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < y.width(); ++k)
      if (y.at(t, k) > y.at(t, best)) best = k;
    path.push_back(static_cast<int>(best));
    score *= y.at(t, best);
  }
  return {collapse(path, y.blank_index()), score};
}

/// Fixture format: "T K" then T lines of K reals.
inline ProbMatrix read_prob_matrix(std::istream& in) {
  std::size_t t = 0, k = 0;
  if (!(in >> t >> k)) throw Error(ErrorKind::rejected_input, "probability matrix header must be 'T K'");
  if (t == 0 || k < 2 || t > 1'000'000 || k > 100'000) throw Error(ErrorKind::rejected_input, "bad matrix shape");
  std::vector<double> values(t * k);
  for (double& v : values)
    if (!(in >> v)) throw Error(ErrorKind::rejected_input, "probability matrix truncated");
  return ProbMatrix(t, k, std::move(values));
}

inline void write_prob_matrix(std::ostream& out, const ProbMatrix& y) {
  const auto old = out.precision(17);
  out << y.timesteps() << ' ' << y.width() << '\n';
  for (std::size_t t = 0; t < y.timesteps(); ++t) {
    for (std::size_t k = 0; k < y.width(); ++k) out << (k ? " " : "") << y.at(t, k);
    out << '\n';
  }
  out.precision(old);
}

}  // namespace usdeid::ctc
