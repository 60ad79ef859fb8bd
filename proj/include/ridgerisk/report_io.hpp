#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ridgerisk/experiments.hpp"

namespace ridgerisk {

inline constexpr const char* kFigureHeader =
    "setting,multiplier,tau,mse_out,mse_out_se,mse_in,mse_in_se,norm_out,norm_in,"
    "is_argmin_out,is_argmin_in";

/// Shortest round-trip text is not required; 17 significant digits is.
[[nodiscard]] std::string format_double(double value);

void write_csv(const FigureTable& table, std::ostream& out);
/// path "-" writes to stdout. I/O failures throw std::runtime_error naming the path.
void emit_csv(const FigureTable& table, const std::string& path);

/// Inverse of write_csv; rejects a wrong header.
[[nodiscard]] FigureTable parse_csv(std::istream& in);
[[nodiscard]] FigureTable read_csv(const std::string& path);

/// Generic CSV: '#' lines, one header row, then data rows. No quoting.
struct CsvDocument {
  std::vector<std::string> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
[[nodiscard]] CsvDocument parse_csv_document(std::istream& in);

void write_approx_csv(const ApproxTable& table, std::ostream& out);
void emit_approx_csv(const ApproxTable& table, const std::string& path);

/// Log-log SVG of MSE against tau: one <g class="series"> per
/// (setting, multiplier) group, out-sample solid, in-sample dashed, argmins marked.
void write_plot(const FigureTable& table, std::ostream& out);
void emit_plot(const FigureTable& table, const std::string& path);

}  // namespace ridgerisk
