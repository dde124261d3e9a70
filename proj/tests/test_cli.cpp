#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "accelcal/cli_app.hpp"
#include "accelcal/error_analysis.hpp"
#include "accelcal/geometry.hpp"
#include "accelcal/io.hpp"

using namespace accelcal;
namespace fs = std::filesystem;

namespace {

struct Capture {
  Capture() : old_(std::cout.rdbuf(buf_.rdbuf())) {}
  ~Capture() { std::cout.rdbuf(old_); }
  std::string text() const { return buf_.str(); }

 private:
  std::ostringstream buf_;
  std::streambuf* old_;
};

int run_quiet(const std::vector<std::string>& args, std::string* out = nullptr) {
  Capture cap;
  const int rc = cli::run(args);
  if (out) *out = cap.text();
  return rc;
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "accelcal_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("simulate then calibrate recovers the truth end to end") {
  const fs::path dir = temp_dir();
  const fs::path poses = dir / "poses.csv";
  const fs::path truth = dir / "truth.json";
  const fs::path params = dir / "params.json";

  CHECK(run_quiet({"simulate", "--poses", "24", "--noise", "0", "--s", "0.1,-0.2,0.05",
                   "--b", "1.01,0.99,1.02", "--angles", "1.54,1.60,1.58", "--output",
                   poses.string(), "--truth-output", truth.string()}) == 0);

  std::string report;
  CHECK(run_quiet({"calibrate", poses.string(), "--output", params.string(), "--format",
                   "json"},
                  &report) == 0);
  const nlohmann::json j = nlohmann::json::parse(report);
  CHECK(j.at("converged") == true);

  const io::ParamsFile got = io::load_params(params);
  const io::ParamsFile want = io::load_params(truth);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(got.params.shift[static_cast<std::size_t>(i)] -
                   want.params.shift[static_cast<std::size_t>(i)]) < 1e-6);
    CHECK(std::abs(got.params.scale[static_cast<std::size_t>(i)] -
                   want.params.scale[static_cast<std::size_t>(i)]) < 1e-6);
  }
  CHECK(std::abs(got.params.angles.phi() - want.params.angles.phi()) < 1e-6);
  CHECK(std::abs(got.params.angles.psi() - want.params.angles.psi()) < 1e-6);
  CHECK(std::abs(got.params.angles.theta() - want.params.angles.theta()) < 1e-6);
  REQUIRE(got.fit.has_value());
  CHECK(got.fit->poses == 24);
}

TEST_CASE("calibrate maps input problems to distinct exit codes") {
  const fs::path dir = temp_dir();

  const fs::path header_only = dir / "header_only.csv";
  spit(header_only, "ax,ay,az\n");
  const fs::path no_output1 = dir / "never1.json";
  CHECK(run_quiet({"calibrate", header_only.string(), "--output", no_output1.string()}) ==
        2);
  CHECK(!fs::exists(no_output1));

  const fs::path five = dir / "five.csv";
  spit(five, "ax,ay,az\n1,2,3\n2,3,4\n3,4,5\n4,5,6\n5,6,7\n");
  const fs::path no_output2 = dir / "never2.json";
  CHECK(run_quiet({"calibrate", five.string(), "--output", no_output2.string()}) == 1);
  CHECK(!fs::exists(no_output2));

  const fs::path bad = dir / "bad.csv";
  spit(bad, "ax,ay,az\n1,2,3\n1,oops,3\n");
  CHECK(run_quiet({"calibrate", bad.string()}) == 2);

  CHECK(run_quiet({"calibrate", (dir / "missing.csv").string()}) == 2);

  // Axis-aligned poses cannot identify nine parameters.
  std::string axes = "ax,ay,az\n";
  for (int rep = 0; rep < 2; ++rep)
    axes += "9.8,0,0\n-9.8,0,0\n0,9.8,0\n0,-9.8,0\n0,0,9.8\n0,0,-9.8\n";
  const fs::path degen = dir / "degen.csv";
  spit(degen, axes);
  CHECK(run_quiet({"calibrate", degen.string(), "--output", (dir / "degen.json").string()}) ==
        3);

  CHECK(run_quiet({"calibrate"}) == 1);             // missing positional
  CHECK(run_quiet({"calibrate", five.string(), "--angle-tol", "0.5"}) == 1);
  CHECK(run_quiet({"nonsense"}) == 1);
  CHECK(run_quiet({"--help"}) == 0);
  CHECK(run_quiet({"--version"}) == 0);
}

TEST_CASE("correct applies params files faithfully") {
  const fs::path dir = temp_dir();
  const fs::path poses = dir / "c_poses.csv";
  CHECK(run_quiet({"simulate", "--poses", "12", "--noise", "0.3", "--s", "0.2,0.1,-0.4",
                   "--b", "1.05,0.95,1.1", "--angles", "1.56,1.6,1.59", "--output",
                   poses.string()}) == 0);

  io::ParamsFile identity;
  const fs::path ident = dir / "identity.json";
  io::save_params(ident, identity);

  const fs::path out = dir / "out.csv";
  CHECK(run_quiet({"correct", ident.string(), poses.string(), "--output", out.string()}) ==
        0);
  CHECK(slurp(out) == slurp(poses));  // identity params: byte-identical copy

  // Row-by-row agreement with the library pipeline for real params.
  io::ParamsFile skew;
  skew.params.shift = {0.2, 0.1, -0.4};
  skew.params.scale = {1.05, 0.95, 1.1};
  skew.params.angles = AxisAngles(1.56, 1.6, 1.59);
  const fs::path skewp = dir / "skew.json";
  io::save_params(skewp, skew);
  CHECK(run_quiet({"correct", skewp.string(), poses.string(), "--output", out.string()}) ==
        0);
  const auto raw = io::read_samples_file(poses);
  const auto corrected = io::read_samples_file(out);
  REQUIRE(corrected.size() == raw.size());
  const Corrector corr(skew.params);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Vec3 want = corr(raw[i]);
    CHECK(std::abs(corrected[i].ax - want.x) < 1e-12);
    CHECK(std::abs(corrected[i].ay - want.y) < 1e-12);
    CHECK(std::abs(corrected[i].az - want.z) < 1e-12);
  }

  // Empty recording passes through as an empty recording.
  const fs::path empty = dir / "empty.csv";
  spit(empty, "ax,ay,az\n");
  CHECK(run_quiet({"correct", ident.string(), empty.string(), "--output", out.string()}) ==
        0);
  CHECK(slurp(out) == "ax,ay,az\n");

  // Wrong schema version is malformed input.
  nlohmann::json doc = nlohmann::json::parse(io::render_params(identity));
  doc["schema_version"] = 7;
  const fs::path wrong = dir / "wrong.json";
  spit(wrong, doc.dump());
  CHECK(run_quiet({"correct", wrong.string(), poses.string(), "--output", out.string()}) ==
        2);
}

TEST_CASE("analyze reports match the library solvers") {
  std::string out;
  REQUIRE(run_quiet({"analyze", "max-error", "--format", "json"}, &out) == 0);
  const nlohmann::json p1 = nlohmann::json::parse(out);
  const ErrorProblemResult lib1 = solve_problem1(GravityConstant(), kDefaultAngleTol);
  CHECK(p1.at("max_abs_error_mps2").get<double>() == lib1.max_value);
  CHECK(p1.at("evaluations").get<std::uint64_t>() == lib1.evaluations);
  CHECK(p1.at("argmax_a").size() == 3);

  REQUIRE(run_quiet({"analyze", "relative-error", "--format", "json"}, &out) == 0);
  const nlohmann::json p2 = nlohmann::json::parse(out);
  const ErrorProblemResult lib2 =
      solve_problem2(4.0 * kStandardGravity, kDefaultAngleTol);
  CHECK(p2.at("max_rel_error").get<double>() == lib2.max_value);
  CHECK(p2.at("box_half_width").get<double>() == 4.0 * kStandardGravity);

  REQUIRE(run_quiet({"analyze", "max-error", "--angle-tol", "0"}, &out) == 0);
  CHECK(out.find("max-abs-error-mps2: 0\n") == 0);

  // Report duplication into a file via --output.
  const fs::path dir = temp_dir();
  const fs::path rep = dir / "report.json";
  REQUIRE(run_quiet({"analyze", "relative-error", "--format", "json", "--output",
                     rep.string()},
                    &out) == 0);
  CHECK(nlohmann::json::parse(slurp(rep)) == nlohmann::json::parse(out));

  CHECK(run_quiet({"analyze"}) == 1);
  CHECK(run_quiet({"analyze", "relative-error", "--box", "-1"}) == 1);
}

TEST_CASE("histogram and domains emit deterministic CSV") {
  const fs::path dir = temp_dir();
  const fs::path h1 = dir / "h1.csv";
  const fs::path h2 = dir / "h2.csv";
  CHECK(run_quiet({"histogram", "--samples", "20000", "--output", h1.string()}) == 0);
  CHECK(run_quiet({"histogram", "--samples", "20000", "--output", h2.string()}) == 0);
  CHECK(slurp(h1) == slurp(h2));
  CHECK(slurp(h1).substr(0, 23) == "bin_low,bin_high,count\n");

  std::string out;
  CHECK(run_quiet({"histogram", "--samples", "5000", "--angles", "orthogonal",
                   "--output", h1.string(), "--format", "json"},
                  &out) == 0);
  const nlohmann::json meta = nlohmann::json::parse(out);
  CHECK(meta.at("kept_samples") == 5000);
  std::istringstream csv(slurp(h1));
  std::string line;
  std::getline(csv, line);  // header
  std::size_t nonzero = 0;
  bool first_has_all = false;
  bool first = true;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    const unsigned long count = std::stoul(line.substr(c2 + 1));
    if (count > 0) ++nonzero;
    if (first) first_has_all = count == 5000;
    first = false;
    (void)c1;
  }
  CHECK(nonzero == 1);
  CHECK(first_has_all);

  const fs::path d1 = dir / "d1.csv";
  const fs::path d2 = dir / "d2.csv";
  CHECK(run_quiet({"domains", "--samples", "20000", "--threshold", "0.016", "--side",
                   "ge", "--output", d1.string()}) == 0);
  CHECK(run_quiet({"domains", "--samples", "20000", "--threshold", "0.016", "--side",
                   "ge", "--output", d2.string()}) == 0);
  CHECK(slurp(d1) == slurp(d2));

  std::istringstream dcsv(slurp(d1));
  std::getline(dcsv, line);
  CHECK(line == "x,y,z,rel_error");
  std::size_t rows = 0;
  while (std::getline(dcsv, line)) {
    ++rows;
    const double rel = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(rel >= 0.016);
  }
  CHECK(rows > 0);

  CHECK(run_quiet({"domains", "--side", "sideways"}) == 1);
  CHECK(run_quiet({"histogram", "--angles", "1.0,1.6,1.6"}) == 1);
}

TEST_CASE("simulate honors pose count and seeding") {
  const fs::path dir = temp_dir();
  const fs::path one = dir / "one.csv";
  CHECK(run_quiet({"simulate", "--poses", "1", "--output", one.string()}) == 0);
  const std::string text = slurp(one);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);  // header + 1 row

  const fs::path s1 = dir / "s1.csv";
  const fs::path s2 = dir / "s2.csv";
  CHECK(run_quiet({"simulate", "--poses", "50", "--noise", "0.1", "--seed", "9",
                   "--output", s1.string()}) == 0);
  CHECK(run_quiet({"simulate", "--poses", "50", "--noise", "0.1", "--seed", "9",
                   "--output", s2.string()}) == 0);
  CHECK(slurp(s1) == slurp(s2));

  CHECK(run_quiet({"simulate", "--poses", "0"}) == 1);
  CHECK(run_quiet({"simulate", "--noise", "-0.1"}) == 1);
  CHECK(run_quiet({"simulate", "--b", "1,1"}) == 1);
}
