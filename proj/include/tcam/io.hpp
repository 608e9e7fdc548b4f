#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcam/experiments.hpp"
#include "tcam/tensor.hpp"

namespace tcam::io {

/** Malformed input file; the message names the file and line (text) or byte offset (binary). */
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TensorFormat { Text, Binary };

/*
 * Text tensor file:
 *
 *     tcam-tensor v1
 *     order 3
 *     shape 2 3 4
 *     <24 values, whitespace separated, first index fastest>
 *
 * Lines starting with '#' are ignored. Values are written in shortest
 * round-trip form, so finite doubles survive a write/read cycle bit-exactly.
 *
 * Binary twin: the 8 bytes "TCAMTNS1", then order, each mode size (uint64
 * little-endian) and the values as little-endian IEEE-754 doubles.
 *
 * Mask files use the header "tcam-mask v1" and a 0/1 payload.
 */
DenseTensor parse_tensor(std::istream& in, const std::string& source = "<stream>");
void format_tensor(std::ostream& out, const DenseTensor& t, TensorFormat format = TensorFormat::Text);

DenseTensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const DenseTensor& t, TensorFormat format = TensorFormat::Text);

ObservationMask parse_mask(std::istream& in, const std::string& source = "<stream>");
void format_mask(std::ostream& out, const ObservationMask& m);

ObservationMask read_mask(const std::string& path);
void write_mask(const std::string& path, const ObservationMask& m);

/** Writes via a temporary sibling file and rename; "-" writes to stdout. */
void write_atomically(const std::string& path, const std::string& contents);

/** "1,5,100,5,1" -> {1, 5, 100, 5, 1}; every entry must be a positive integer. */
std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text, const std::string& what);

/** Shortest decimal form that reads back to the same double. */
std::string format_double(double v);

/*
 * Sweep plan file: `key = value` lines, '#' comments. Keys:
 *   shape, rank, ratios, trials, methods (tcam-tt, tmm:<split>), seed,
 *   tol, max_iter, ridge, tmm_tol, tmm_max_iter
 */
SweepPlan parse_plan(std::istream& in, const std::string& source = "<stream>");
SweepPlan read_plan(const std::string& path);

/** CSV with columns method,obs_ratio,trial,iterations,reme,seconds. */
void format_sweep_csv(std::ostream& out, const SweepResult& result);
void format_summary_csv(std::ostream& out, const std::vector<SweepSummaryRow>& rows);

}  // namespace tcam::io
