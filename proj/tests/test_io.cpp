#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "accelcal/io.hpp"
#include "oracles.hpp"

using namespace accelcal;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "accelcal_io_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  const auto parse_back = [](const std::string& s) {
    double v = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
  };
  const double cases[] = {0.0,       -0.0,    1.0,     9.80665, 0.3130299,
                          1.5707963267948966, 1e-300,  -1e300,  0.1,
                          1.0 / 3.0, 5e-324};
  for (double v : cases) CHECK(parse_back(io::format_double(v)) == v);
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const double v = rng::uniform(3, k, -1e6, 1e6);
    CHECK(parse_back(io::format_double(v)) == v);
  }
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(9.80665) == "9.80665");
}

TEST_CASE("sample CSV round-trips bitwise") {
  std::vector<RawSample> samples;
  for (std::uint64_t k = 0; k < 500; ++k) {
    const Vec3 v = oracle::random_vec(5, k, -50.0, 50.0);
    samples.push_back({v.x, v.y, v.z});
  }
  const std::string text = io::render_samples(samples);
  CHECK(text.substr(0, 9) == "ax,ay,az\n");
  CHECK(text.find('\r') == std::string::npos);

  std::istringstream in(text);
  const std::vector<RawSample> back = io::read_samples(in, "mem");
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].ax == samples[i].ax);
    CHECK(back[i].ay == samples[i].ay);
    CHECK(back[i].az == samples[i].az);
  }
}

TEST_CASE("sample CSV reading is lenient where it should be") {
  std::istringstream crlf("ax,ay,az\r\n1,2,3\r\n\r\n4,5.5,-6e-3\r\n");
  const auto rows = io::read_samples(crlf, "crlf");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].ay == 5.5);
  CHECK(rows[1].az == -6e-3);

  std::istringstream bom("\xEF\xBB\xBF" "ax,ay,az\n7,8,9\n");
  CHECK(io::read_samples(bom, "bom").size() == 1);

  std::istringstream spaced("ax,ay,az\n 1 , 2 , 3 \n");
  CHECK(io::read_samples(spaced, "spaced")[0].ay == 2.0);

  std::istringstream header_only("ax,ay,az\n");
  CHECK(io::read_samples(header_only, "hdr").empty());
}

TEST_CASE("sample CSV errors carry line numbers") {
  std::istringstream missing("ax,ay\n1,2\n");
  CHECK_THROWS_WITH_AS(io::read_samples(missing, "f"),
                       "f:1: expected 'ax,ay,az' header", io::ParseError);

  std::istringstream twocol("ax,ay,az\n1,2\n");
  CHECK_THROWS_WITH_AS(io::read_samples(twocol, "f"),
                       "f:2: expected three comma-separated values", io::ParseError);

  std::istringstream alpha("ax,ay,az\n1,2,3\n1,x,3\n");
  try {
    io::read_samples(alpha, "f");
    FAIL("expected ParseError");
  } catch (const io::ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("f:3") == 0);
  }

  std::istringstream inf("ax,ay,az\n1,inf,3\n");
  CHECK_THROWS_AS(io::read_samples(inf, "f"), io::ParseError);

  std::istringstream empty("");
  CHECK_THROWS_AS(io::read_samples(empty, "f"), io::ParseError);

  CHECK_THROWS_AS(io::read_samples_file(temp_dir() / "does_not_exist.csv"),
                  io::ParseError);
}

TEST_CASE("params files round-trip bitwise") {
  io::ParamsFile file;
  file.params.shift = {0.1, -0.2, 0.05};
  file.params.scale = {1.01, 0.99, 1.02};
  file.params.angles = AxisAngles(1.53938, 1.60221, 1.60221, 0.03);
  file.g = GravityConstant(9.81);
  file.fit = io::FitMetadata{1.234e-9, 24};

  const std::string text = io::render_params(file);
  const io::ParamsFile back = io::parse_params(text);
  CHECK(back.params.shift == file.params.shift);
  CHECK(back.params.scale == file.params.scale);
  CHECK(back.params.angles.phi() == file.params.angles.phi());
  CHECK(back.params.angles.psi() == file.params.angles.psi());
  CHECK(back.params.angles.theta() == file.params.angles.theta());
  CHECK(back.g.mps2() == file.g.mps2());
  REQUIRE(back.fit.has_value());
  CHECK(back.fit->residual_rms == file.fit->residual_rms);
  CHECK(back.fit->poses == 24);

  // Idempotent rendering.
  CHECK(io::render_params(back) == text);

  // Metadata is optional.
  file.fit.reset();
  const io::ParamsFile plain = io::parse_params(io::render_params(file));
  CHECK(!plain.fit.has_value());

  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("s").size() == 3);
  CHECK(j.at("b").size() == 3);
  CHECK(j.at("angles_rad").contains("phi"));
  CHECK(j.at("g") == 9.81);
}

TEST_CASE("params parsing rejects bad documents") {
  io::ParamsFile file;
  nlohmann::json j = nlohmann::json::parse(io::render_params(file));

  nlohmann::json wrong_version = j;
  wrong_version["schema_version"] = 2;
  CHECK_THROWS_AS(io::parse_params(wrong_version.dump()), io::ParseError);

  nlohmann::json missing = j;
  missing.erase("b");
  CHECK_THROWS_AS(io::parse_params(missing.dump()), io::ParseError);

  nlohmann::json short_array = j;
  short_array["s"] = {1.0, 2.0};
  CHECK_THROWS_AS(io::parse_params(short_array.dump()), io::ParseError);

  nlohmann::json bad_angle = j;
  bad_angle["angles_rad"]["phi"] = 1.0;  // far outside any supported band
  CHECK_THROWS_AS(io::parse_params(bad_angle.dump()), io::ParseError);

  nlohmann::json bad_scale = j;
  bad_scale["b"] = {1.0, -1.0, 1.0};
  CHECK_THROWS_AS(io::parse_params(bad_scale.dump()), io::ParseError);

  nlohmann::json bad_g = j;
  bad_g["g"] = 0.0;
  CHECK_THROWS_AS(io::parse_params(bad_g.dump()), io::ParseError);

  CHECK_THROWS_AS(io::parse_params("not json at all"), io::ParseError);
  CHECK_THROWS_AS(io::parse_params("[1,2,3]"), io::ParseError);
}

TEST_CASE("atomic_write leaves no partial state behind") {
  const fs::path dir = temp_dir();
  const fs::path target = dir / "atomic.txt";

  io::atomic_write(target, "first\n");
  CHECK(slurp(target) == "first\n");
  io::atomic_write(target, "second\n");
  CHECK(slurp(target) == "second\n");

  std::size_t leftovers = 0;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().filename().string().find(".tmp") != std::string::npos) ++leftovers;
  CHECK(leftovers == 0);

  const fs::path nested = dir / "samples.csv";
  io::write_samples_file(nested, {{1.0, 2.0, 3.0}});
  CHECK(io::read_samples_file(nested).size() == 1);

  fs::remove_all(dir);
}
