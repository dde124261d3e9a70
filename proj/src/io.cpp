#include "accelcal/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace accelcal::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, const std::string& source, std::size_t line) {
  const std::string_view f = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (ec != std::errc() || ptr != f.data() + f.size())
    throw ParseError(source + ":" + std::to_string(line) + ": cannot parse number '" +
                         std::string(f) + "'",
                     line);
  if (!std::isfinite(value))
    throw ParseError(source + ":" + std::to_string(line) + ": non-finite value", line);
  return value;
}

std::array<std::string_view, 3> split3(std::string_view s, const std::string& source,
                                       std::size_t line) {
  const std::size_t c1 = s.find(',');
  const std::size_t c2 = c1 == std::string_view::npos ? std::string_view::npos
                                                      : s.find(',', c1 + 1);
  if (c1 == std::string_view::npos || c2 == std::string_view::npos ||
      s.find(',', c2 + 1) != std::string_view::npos)
    throw ParseError(source + ":" + std::to_string(line) +
                         ": expected three comma-separated values",
                     line);
  return {s.substr(0, c1), s.substr(c1 + 1, c2 - c1 - 1), s.substr(c2 + 1)};
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), ptr);
}

std::vector<RawSample> read_samples(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line))
    throw ParseError(source_name + ": empty file, expected 'ax,ay,az' header");
  ++lineno;
  std::string_view header = line;
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  if (trim(header) != "ax,ay,az")
    throw ParseError(source_name + ":1: expected 'ax,ay,az' header", 1);

  std::vector<RawSample> samples;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split3(line, source_name, lineno);
    samples.push_back({parse_field(fields[0], source_name, lineno),
                       parse_field(fields[1], source_name, lineno),
                       parse_field(fields[2], source_name, lineno)});
  }
  return samples;
}

std::vector<RawSample> read_samples_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  return read_samples(in, path.string());
}

std::string render_samples(const std::vector<RawSample>& samples) {
  std::string out = "ax,ay,az\n";
  for (const RawSample& s : samples) {
    out += format_double(s.ax);
    out += ',';
    out += format_double(s.ay);
    out += ',';
    out += format_double(s.az);
    out += '\n';
  }
  return out;
}

void write_samples_file(const std::filesystem::path& path,
                        const std::vector<RawSample>& samples) {
  atomic_write(path, render_samples(samples));
}

std::string render_params(const ParamsFile& file) {
  nlohmann::json j;
  j["schema_version"] = kParamsSchemaVersion;
  j["s"] = file.params.shift;
  j["b"] = file.params.scale;
  j["angles_rad"] = {{"phi", file.params.angles.phi()},
                     {"psi", file.params.angles.psi()},
                     {"theta", file.params.angles.theta()}};
  j["g"] = file.g.mps2();
  if (file.fit)
    j["fit"] = {{"residual_rms", file.fit->residual_rms}, {"poses", file.fit->poses}};
  return j.dump(2) + "\n";
}

ParamsFile parse_params(const std::string& text, const std::string& source_name) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    const int version = j.at("schema_version").get<int>();
    if (version != kParamsSchemaVersion)
      throw ParseError(source_name + ": unsupported schema_version " +
                       std::to_string(version) + ", expected " +
                       std::to_string(kParamsSchemaVersion));

    const auto triplet_of = [](const nlohmann::json& a) {
      if (!a.is_array() || a.size() != 3)
        throw std::runtime_error("expected an array of three numbers");
      return std::array<double, 3>{a[0].get<double>(), a[1].get<double>(),
                                   a[2].get<double>()};
    };

    ParamsFile file;
    file.params.shift = triplet_of(j.at("s"));
    file.params.scale = triplet_of(j.at("b"));
    const nlohmann::json& ang = j.at("angles_rad");
    file.params.angles =
        AxisAngles(ang.at("phi").get<double>(), ang.at("psi").get<double>(),
                   ang.at("theta").get<double>(), kMaxAngleTol);
    validate(file.params);
    file.g = GravityConstant(j.at("g").get<double>());
    if (j.contains("fit")) {
      FitMetadata meta;
      meta.residual_rms = j.at("fit").at("residual_rms").get<double>();
      meta.poses = j.at("fit").at("poses").get<std::size_t>();
      if (!std::isfinite(meta.residual_rms) || meta.residual_rms < 0.0)
        throw std::runtime_error("fit.residual_rms must be a non-negative number");
      file.fit = meta;
    }
    return file;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(source_name + ": " + e.what());
  }
}

void save_params(const std::filesystem::path& path, const ParamsFile& file) {
  atomic_write(path, render_params(file));
}

ParamsFile load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_params(buf.str(), path.string());
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path dir = path.parent_path();
  if (dir.empty()) dir = ".";
  std::random_device rd;
  const std::filesystem::path tmp =
      dir / (path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot create file");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error(tmp.string() + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ec2;
    std::filesystem::remove(tmp, ec2);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() +
                             ": " + ec.message());
  }
}

}  // namespace accelcal::io
