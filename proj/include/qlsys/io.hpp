#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "qlsys/grid.hpp"
#include "qlsys/optimizer.hpp"

namespace qlsys {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text dump: `dims:`, `spacing:`, `components:` and `origin:` header lines,
/// then one line per node in row-major order with its multi-index, class
/// and values printed with 17 significant digits.
std::string format_field(const Field& field);
void write_field(const Field& field, const std::filesystem::path& path);

/// Reads a dump back, rebuilding the grid from the stored node classes.
Field parse_field(const std::string& text);
Field read_field(const std::filesystem::path& path);

/// `iteration,energy,pg_norm` per line, no header; iterations + 1 lines.
std::string format_history(const SolveReport& report);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// %.17g rendering used by every text output.
std::string format_double(double v);

}  // namespace qlsys
