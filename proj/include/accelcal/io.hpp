#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "accelcal/types.hpp"

namespace accelcal::io {

// Shortest decimal rendering that parses back to the identical double.
std::string format_double(double value);

// Raised for unreadable or syntactically invalid input files. When the
// problem is tied to a specific line the message carries "file:line:".
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(message), line_(line) {}

  // 1-based source line, 0 when the error is not tied to one.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// CSV recordings: mandatory "ax,ay,az" header, one sample per line,
// '.' decimal point. Reading tolerates CRLF and blank lines; writing
// emits LF only.
std::vector<RawSample> read_samples(std::istream& in, const std::string& source_name);
std::vector<RawSample> read_samples_file(const std::filesystem::path& path);
std::string render_samples(const std::vector<RawSample>& samples);
void write_samples_file(const std::filesystem::path& path,
                        const std::vector<RawSample>& samples);

inline constexpr int kParamsSchemaVersion = 1;

struct FitMetadata {
  double residual_rms = 0.0;
  std::size_t poses = 0;
};

// On-disk calibration parameter document.
struct ParamsFile {
  CalibrationParams params;
  GravityConstant g;
  std::optional<FitMetadata> fit;
};

// JSON text of the document / parse plus full validation. parse_params
// throws ParseError for anything that is not a valid, current-schema
// document describing a usable parameter set.
std::string render_params(const ParamsFile& file);
ParamsFile parse_params(const std::string& text, const std::string& source_name = "params");

void save_params(const std::filesystem::path& path, const ParamsFile& file);
ParamsFile load_params(const std::filesystem::path& path);

// Writes content to a temp file in the target directory, then renames it
// over the destination so readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, std::string_view content);

}  // namespace accelcal::io
