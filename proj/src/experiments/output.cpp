#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>

#include "chernoff/experiments.hpp"

namespace chernoff::experiments {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  open_ = true;
  for (const auto& h : header) cell(h);
  open_ = false;
}

void CsvWriter::separator() {
  if (in_row_ >= columns_) throw Error(ErrorCode::ShapeMismatch, "csv row has too many cells");
  if (in_row_ > 0) text_ += ',';
  ++in_row_;
}

CsvWriter& CsvWriter::row() {
  if (in_row_ != columns_) throw Error(ErrorCode::ShapeMismatch, "csv row has too few cells");
  text_ += "\r\n";
  in_row_ = 0;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) {
  separator();
  text_ += format_double(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::int64_t v) {
  separator();
  text_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::uint64_t v) {
  separator();
  text_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
  separator();
  if (v.find_first_of(",\"\r\n") == std::string_view::npos) {
    text_ += v;
    return *this;
  }
  text_ += '"';
  for (char c : v) {
    if (c == '"') text_ += '"';
    text_ += c;
  }
  text_ += '"';
  return *this;
}

std::string CsvWriter::str() const {
  if (in_row_ != 0 && in_row_ != columns_) throw Error(ErrorCode::ShapeMismatch, "csv row left incomplete");
  return in_row_ == columns_ ? text_ + "\r\n" : text_;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::KernelUnderResolved:
    case ErrorCode::IllConditionedFit:
    case ErrorCode::ShellTooThick:
    case ErrorCode::UnsupportedScaling:
      return kExitNumerical;
    default:
      return kExitConfig;
  }
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("CHERNOFF_OUT"); env != nullptr && *env != '\0') return env;
  return "chernoff_out";
}

std::filesystem::path default_preset_dir() {
  if (const char* env = std::getenv("CHERNOFF_PRESETS"); env != nullptr && *env != '\0') return env;
  return CHERNOFF_DEFAULT_PRESET_DIR;
}

}  // namespace chernoff::experiments
