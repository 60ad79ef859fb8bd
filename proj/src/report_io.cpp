#include "ridgerisk/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ridgerisk/error.hpp"

namespace ridgerisk {
namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::stringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw DomainError("bad CSV number '" + s + "'");
  return v;
}

bool to_flag(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw DomainError("bad CSV flag '" + s + "'");
}

template <class Writer>
void with_output(const std::string& path, Writer&& write) {
  if (path == "-") {
    write(std::cout);
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write(out);
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path);
}

void write_metadata(const std::vector<std::string>& metadata, std::ostream& out) {
  for (const auto& m : metadata) out << "# " << m << '\n';
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(const FigureTable& table, std::ostream& out) {
  write_metadata(table.metadata, out);
  out << kFigureHeader << '\n';
  for (const auto& r : table.rows) {
    out << r.setting << ',' << format_double(r.multiplier) << ',' << format_double(r.tau) << ','
        << format_double(r.mse_out) << ',' << format_double(r.mse_out_se) << ','
        << format_double(r.mse_in) << ',' << format_double(r.mse_in_se) << ','
        << format_double(r.norm_out) << ',' << format_double(r.norm_in) << ','
        << (r.is_argmin_out ? 1 : 0) << ',' << (r.is_argmin_in ? 1 : 0) << '\n';
  }
}

void emit_csv(const FigureTable& table, const std::string& path) {
  with_output(path, [&](std::ostream& out) { write_csv(table, out); });
}

CsvDocument parse_csv_document(std::istream& in) {
  CsvDocument doc;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header && line.rfind('#', 0) == 0) {
      doc.metadata.push_back(line.size() > 2 && line[1] == ' ' ? line.substr(2) : line.substr(1));
      continue;
    }
    if (line.empty()) continue;
    if (!have_header) {
      doc.header = split(line);
      have_header = true;
      continue;
    }
    auto cells = split(line);
    if (cells.size() != doc.header.size()) {
      throw DomainError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(doc.header.size()));
    }
    doc.rows.push_back(std::move(cells));
  }
  if (!have_header) throw DomainError("CSV has no header");
  return doc;
}

FigureTable parse_csv(std::istream& in) {
  const CsvDocument doc = parse_csv_document(in);
  if (doc.header != split(kFigureHeader)) throw DomainError("unexpected figure CSV header");
  FigureTable table;
  table.metadata = doc.metadata;
  for (const auto& c : doc.rows) {
    table.rows.push_back(FigureRow{c[0], to_double(c[1]), to_double(c[2]), to_double(c[3]),
                                   to_double(c[4]), to_double(c[5]), to_double(c[6]),
                                   to_double(c[7]), to_double(c[8]), to_flag(c[9]),
                                   to_flag(c[10])});
  }
  return table;
}

FigureTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  try {
    return parse_csv(in);
  } catch (const DomainError& e) {
    throw DomainError(path + ": " + e.what());
  }
}

void write_approx_csv(const ApproxTable& table, std::ostream& out) {
  write_metadata(table.metadata, out);
  out << "tau,alpha,b_out,v_out,b_in,v_in,b_out_hat,v_out_hat,b_in_hat,v_in_hat,v_in_hat_alt,"
         "rel_err_out,rel_err_in,in_range\n";
  for (const auto& r : table.rows) {
    const double values[] = {r.tau,           r.alpha,           r.exact.b_out,
                             r.exact.v_out,   r.exact.b_in,      r.exact.v_in,
                             r.approx.b_out_hat, r.approx.v_out_hat, r.approx.b_in_hat,
                             r.approx.v_in_hat,  r.approx.v_in_hat_alt, r.rel_err_out,
                             r.rel_err_in};
    for (double v : values) out << format_double(v) << ',';
    out << (r.approx.tau_in_range ? 1 : 0) << '\n';
  }
}

void emit_approx_csv(const ApproxTable& table, const std::string& path) {
  with_output(path, [&](std::ostream& out) { write_approx_csv(table, out); });
}

void write_plot(const FigureTable& table, std::ostream& out) {
  constexpr double width = 720, height = 480, left = 70, right = 150, top = 30, bottom = 50;
  const auto groups = summarize(table);

  double tmin = INFINITY, tmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& r : table.rows) {
    if (!(r.tau > 0.0)) continue;
    tmin = std::min(tmin, r.tau);
    tmax = std::max(tmax, r.tau);
    for (double y : {r.mse_out, r.mse_in}) {
      if (y > 0.0) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  }
  if (!(tmin < tmax)) tmin = tmax = 1.0;
  if (!(ymin < ymax)) ymin = ymax = 1.0;
  const double lx0 = std::log10(tmin), lx1 = std::log10(tmax) + (tmin == tmax ? 1.0 : 0.0);
  const double ly0 = std::log10(ymin), ly1 = std::log10(ymax) + (ymin == ymax ? 1.0 : 0.0);
  auto px = [&](double t) {
    return left + (std::log10(t) - lx0) / (lx1 - lx0) * (width - left - right);
  };
  auto py = [&](double y) {
    return height - bottom - (std::log10(y) - ly0) / (ly1 - ly0) * (height - top - bottom);
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
      << "\" y2=\"" << height - bottom << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << height - bottom << "\"/>\n</g>\n";
  out << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int e = static_cast<int>(std::ceil(lx0)); e <= static_cast<int>(std::floor(lx1)); ++e) {
    const double x = px(std::pow(10.0, e));
    out << "<text x=\"" << num(x) << "\" y=\"" << height - bottom + 16
        << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ly0)); e <= static_cast<int>(std::floor(ly1)); ++e) {
    const double y = py(std::pow(10.0, e));
    out << "<text x=\"" << left - 6 << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">tau</text>\n";
  out << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (top + height - bottom) / 2
      << ")\">MSE</text>\n</g>\n";

  std::size_t gi = 0;
  for (const auto& g : groups) {
    const char* color = palette[gi % (sizeof palette / sizeof *palette)];
    std::string out_pts, in_pts;
    std::vector<const FigureRow*> rows;
    for (const auto& r : table.rows) {
      if (r.setting != g.setting || r.multiplier != g.multiplier) continue;
      rows.push_back(&r);
      if (!(r.tau > 0.0)) continue;
      if (r.mse_out > 0.0) out_pts += num(px(r.tau)) + "," + num(py(r.mse_out)) + " ";
      if (r.mse_in > 0.0) in_pts += num(px(r.tau)) + "," + num(py(r.mse_in)) + " ";
    }
    out << "<g class=\"series\" data-setting=\"" << g.setting << "\" data-multiplier=\""
        << format_double(g.multiplier) << "\" stroke=\"" << color << "\" fill=\"none\">\n";
    out << "<polyline class=\"mse-out\" points=\"" << out_pts << "\"/>\n";
    out << "<polyline class=\"mse-in\" stroke-dasharray=\"5,3\" points=\"" << in_pts << "\"/>\n";
    for (const FigureRow* r : rows) {
      if (!(r->tau > 0.0)) continue;
      if (r->is_argmin_out && r->mse_out > 0.0) {
        out << "<circle class=\"argmin-out\" cx=\"" << num(px(r->tau)) << "\" cy=\""
            << num(py(r->mse_out)) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
      }
      if (r->is_argmin_in && r->mse_in > 0.0) {
        out << "<rect class=\"argmin-in\" x=\"" << num(px(r->tau) - 4) << "\" y=\""
            << num(py(r->mse_in) - 4) << "\" width=\"8\" height=\"8\"/>\n";
      }
    }
    const double ly = top + 18.0 * gi;
    out << "<text x=\"" << width - right + 10 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" stroke=\"none\" fill=\"" << color
        << "\">" << g.setting << " x" << format_double(g.multiplier) << "</text>\n";
    out << "</g>\n";
    ++gi;
  }
  out << "</svg>\n";
}

void emit_plot(const FigureTable& table, const std::string& path) {
  with_output(path, [&](std::ostream& out) { write_plot(table, out); });
}

}  // namespace ridgerisk
