#include "qlsys/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace qlsys {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_field(const Field& field) {
  const Grid& g = field.grid();
  std::string out = "dims:";
  for (auto d : g.dims()) out += " " + std::to_string(d);
  out += "\nspacing:";
  for (double h : g.spacing()) out += " " + format_double(h);
  out += "\ncomponents: " + std::to_string(field.components()) + "\norigin:";
  for (double o : g.origin()) out += " " + format_double(o);
  out += '\n';
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    bool first = true;
    for (auto i : g.multi_index(p)) {
      if (!first) out += ' ';
      out += std::to_string(i);
      first = false;
    }
    out += ' ';
    out += to_string(g.node_class(p));
    for (double v : field.at(p)) out += " " + format_double(v);
    out += '\n';
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string() + ": " + std::strerror(errno));
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void write_field(const Field& field, const std::filesystem::path& path) {
  write_text(path, format_field(field));
}

namespace {

[[noreturn]] void bad(std::size_t line, const std::string& msg) {
  throw std::invalid_argument("field dump line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& tok, std::size_t line) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') bad(line, "malformed number '" + tok + "'");
  return v;
}

std::vector<std::string> header_items(std::istringstream& in, const char* name, std::size_t line) {
  std::string text;
  if (!std::getline(in, text)) bad(line, std::string("missing '") + name + ":' header");
  std::istringstream ls(text);
  std::string label;
  ls >> label;
  if (label != std::string(name) + ":") bad(line, std::string("expected '") + name + ":' header");
  std::vector<std::string> items;
  for (std::string t; ls >> t;) items.push_back(t);
  return items;
}

}  // namespace

Field parse_field(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::size_t> dims;
  for (const auto& t : header_items(in, "dims", 1)) dims.push_back(std::stoul(t));
  std::vector<double> spacing, origin;
  for (const auto& t : header_items(in, "spacing", 2)) spacing.push_back(parse_double(t, 2));
  const auto comp = header_items(in, "components", 3);
  if (comp.size() != 1) bad(3, "expected one component count");
  const std::size_t N = std::stoul(comp[0]);
  for (const auto& t : header_items(in, "origin", 4)) origin.push_back(parse_double(t, 4));
  if (dims.empty() || spacing.size() != dims.size() || origin.size() != dims.size())
    bad(1, "header ranks disagree");

  std::size_t count = 1;
  for (auto d : dims) count *= d;
  std::vector<NodeClass> classes(count);
  std::vector<double> values(count * N);
  std::string line;
  std::size_t p = 0, line_no = 4;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (p >= count) bad(line_no, "more node lines than dims allow");
    std::istringstream ls(line);
    std::string tok;
    for (std::size_t k = 0; k < dims.size(); ++k) ls >> tok;
    if (!(ls >> tok)) bad(line_no, "missing node class");
    classes[p] = node_class_from_string(tok);
    for (std::size_t a = 0; a < N; ++a) {
      if (!(ls >> tok)) bad(line_no, "missing value");
      values[p * N + a] = parse_double(tok, line_no);
    }
    ++p;
  }
  if (p != count) bad(line_no, "expected " + std::to_string(count) + " node lines, found " + std::to_string(p));
  auto grid = std::make_shared<const Grid>(std::move(dims), std::move(spacing), std::move(origin),
                                           std::move(classes));
  return Field(std::move(grid), N, std::move(values));
}

Field read_field(const std::filesystem::path& path) { return parse_field(read_text(path)); }

std::string format_history(const SolveReport& report) {
  std::string out;
  for (std::size_t k = 0; k < report.energy_history.size(); ++k)
    out += std::to_string(k) + "," + format_double(report.energy_history[k]) + "," +
           format_double(report.pg_history[k]) + "\n";
  return out;
}

}  // namespace qlsys
