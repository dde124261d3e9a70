#include "accelcal/cli_app.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "accelcal/calibration.hpp"
#include "accelcal/error_analysis.hpp"
#include "accelcal/geometry.hpp"
#include "accelcal/io.hpp"
#include "accelcal/synthetic.hpp"
#include "accelcal/types.hpp"

namespace accelcal::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMalformedInput = 2;
constexpr int kExitIllPosed = 3;
constexpr int kExitNoConvergence = 4;

Vec3 parse_vec3(const std::string& text) {
  const std::size_t c1 = text.find(',');
  const std::size_t c2 = c1 == std::string::npos ? std::string::npos : text.find(',', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos ||
      text.find(',', c2 + 1) != std::string::npos)
    throw std::invalid_argument("expected three comma-separated numbers, got '" + text + "'");
  const auto num = [&](std::size_t from, std::size_t to) {
    try {
      std::size_t used = 0;
      const std::string part = text.substr(from, to - from);
      const double v = std::stod(part, &used);
      while (used < part.size() && (part[used] == ' ' || part[used] == '\t')) ++used;
      if (used != part.size()) throw std::invalid_argument(part);
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse number in '" + text + "'");
    }
  };
  return {num(0, c1), num(c1 + 1, c2), num(c2 + 1, text.size())};
}

// "orthogonal" or "phi,psi,theta" in radians; validated with the widest
// supported tolerance band so externally fitted angle sets load.
AxisAngles parse_angles(const std::string& text) {
  if (text == "orthogonal") return AxisAngles::orthogonal();
  const Vec3 v = parse_vec3(text);
  return AxisAngles(v.x, v.y, v.z, kMaxAngleTol);
}

std::array<double, 3> parse_triplet(const std::string& text) {
  const Vec3 v = parse_vec3(text);
  return {v.x, v.y, v.z};
}

nlohmann::json vec3_json(const Vec3& v) { return {v.x, v.y, v.z}; }

nlohmann::json triplet_json(const std::array<double, 3>& v) { return {v[0], v[1], v[2]}; }

std::string triplet_text(const std::array<double, 3>& v) {
  return io::format_double(v[0]) + "," + io::format_double(v[1]) + "," +
         io::format_double(v[2]);
}

nlohmann::json angles_json(const AxisAngles& a) {
  return {{"phi", a.phi()}, {"psi", a.psi()}, {"theta", a.theta()}};
}

void emit_report(const std::string& text_body, const nlohmann::json& json_body,
                 const std::string& format, const std::string& output_path) {
  const std::string rendered =
      format == "json" ? json_body.dump(2) + "\n" : text_body;
  std::cout << rendered;
  if (!output_path.empty()) io::atomic_write(output_path, rendered);
}

struct CalibrateCmd {
  std::string input;
  std::string output = "params.json";
  std::string format = "text";
  double g = kStandardGravity;
  double angle_tol = kDefaultAngleTol;
  int restarts = 1;
  std::uint64_t seed = 42;

  int run() const {
    const std::vector<RawSample> rows = io::read_samples_file(input);
    if (rows.empty()) throw io::ParseError(input + ": no data rows");
    if (rows.size() < 9) {
      std::cerr << "error: calibration needs at least 9 poses, got " << rows.size()
                << "\n";
      return kExitUsage;
    }

    PoseDataset data;
    data.samples = rows;

    FitOptions opts;
    opts.angle_tolerance = angle_tol;
    opts.restarts = restarts;
    opts.seed = seed;
    const GravityConstant gravity(g);
    const FitReport report = fit(data, gravity, opts);

    io::save_params(output, {report.params, gravity,
                             io::FitMetadata{report.residual_rms, rows.size()}});

    const CalibrationParams& p = report.params;
    std::string text;
    text += "converged: " + std::string(report.converged ? "yes" : "no") + "\n";
    text += "iterations: " + std::to_string(report.iterations) + "\n";
    text += "residual-rms: " + io::format_double(report.residual_rms) + "\n";
    text += "s: " + triplet_text(p.shift) + "\n";
    text += "b: " + triplet_text(p.scale) + "\n";
    text += "angles-rad: " + io::format_double(p.angles.phi()) + "," +
            io::format_double(p.angles.psi()) + "," + io::format_double(p.angles.theta()) +
            "\n";
    text += "poses: " + std::to_string(rows.size()) + "\n";
    text += "params-file: " + output + "\n";

    nlohmann::json j;
    j["converged"] = report.converged;
    j["iterations"] = report.iterations;
    j["residual_rms"] = report.residual_rms;
    j["s"] = triplet_json(p.shift);
    j["b"] = triplet_json(p.scale);
    j["angles_rad"] = angles_json(p.angles);
    j["poses"] = rows.size();
    j["params_file"] = output;

    const std::string rendered = format == "json" ? j.dump(2) + "\n" : text;
    std::cout << rendered;
    return report.converged ? kExitOk : kExitNoConvergence;
  }
};

struct CorrectCmd {
  std::string params;
  std::string input;
  std::string output = "corrected.csv";

  int run() const {
    const io::ParamsFile file = io::load_params(params);
    const std::vector<RawSample> rows = io::read_samples_file(input);
    const Corrector corrector(file.params);

    std::vector<RawSample> corrected;
    corrected.reserve(rows.size());
    for (const RawSample& r : rows) {
      const Vec3 a = corrector(r);
      corrected.push_back({a.x, a.y, a.z});
    }
    io::write_samples_file(output, corrected);
    std::cout << "corrected " << rows.size() << " samples -> " << output << "\n";
    return kExitOk;
  }
};

struct AnalyzeCmd {
  bool relative = false;
  std::string format = "text";
  std::string output;
  double g = kStandardGravity;
  double angle_tol = kDefaultAngleTol;
  double box = 0.0;  // 0: use 4g
  bool box_given = false;

  int run() const {
    const GravityConstant gravity(g);
    const double half_width = box_given ? box : 4.0 * gravity.mps2();
    const ErrorProblemResult res = relative
                                       ? solve_problem2(half_width, angle_tol)
                                       : solve_problem1(gravity, angle_tol);

    std::string text;
    nlohmann::json j;
    if (relative) {
      text += "max-rel-error: " + io::format_double(res.max_value) + "\n";
      text += "max-rel-error-percent: " + io::format_double(100.0 * res.max_value) + "\n";
      text += "box-half-width: " + io::format_double(half_width) + "\n";
      j["max_rel_error"] = res.max_value;
      j["max_rel_error_percent"] = 100.0 * res.max_value;
      j["box_half_width"] = half_width;
    } else {
      text += "max-abs-error-mps2: " + io::format_double(res.max_value) + "\n";
      j["max_abs_error_mps2"] = res.max_value;
    }
    text += "argmax-a: " + io::format_double(res.argmax_accel.x) + "," +
            io::format_double(res.argmax_accel.y) + "," +
            io::format_double(res.argmax_accel.z) + "\n";
    text += "argmax-angles-rad: " + io::format_double(res.argmax_angles.phi()) + "," +
            io::format_double(res.argmax_angles.psi()) + "," +
            io::format_double(res.argmax_angles.theta()) + "\n";
    text += "evaluations: " + std::to_string(res.evaluations) + "\n";
    j["argmax_a"] = vec3_json(res.argmax_accel);
    j["argmax_angles_rad"] = angles_json(res.argmax_angles);
    j["evaluations"] = res.evaluations;

    emit_report(text, j, format, output);
    return kExitOk;
  }
};

struct HistogramCmd {
  std::string angles = "1.53938,1.60221,1.60221";
  std::string output = "histogram.csv";
  std::string format = "text";
  double box = 20.0;
  std::size_t samples = 1000000;
  std::size_t bins = 60;
  std::vector<double> range;
  std::uint64_t seed = 42;

  int run() const {
    HistogramSpec spec;
    spec.angles = parse_angles(angles);
    spec.box_half_width = box;
    spec.sample_count = samples;
    spec.bin_count = bins;
    spec.seed = seed;
    if (!range.empty()) spec.range = std::make_pair(range[0], range[1]);

    const Histogram h = histogram(spec);
    std::string csv = "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      csv += io::format_double(h.edges[i]) + "," + io::format_double(h.edges[i + 1]) +
             "," + std::to_string(h.counts[i]) + "\n";
    }
    io::atomic_write(output, csv);

    const std::string text = "kept-samples: " + std::to_string(h.kept_samples) +
                             "\nbins: " + std::to_string(h.counts.size()) +
                             "\nhistogram-file: " + output + "\n";
    nlohmann::json j;
    j["kept_samples"] = h.kept_samples;
    j["bins"] = h.counts.size();
    j["histogram_file"] = output;
    std::cout << (format == "json" ? j.dump(2) + "\n" : text);
    return kExitOk;
  }
};

struct DomainsCmd {
  std::string angles = "1.53938,1.60221,1.60221";
  std::string output = "domain.csv";
  std::string format = "text";
  std::string side = "le";
  double threshold = 0.014;
  double box = 20.0;
  std::size_t samples = 1000000;
  std::size_t max_points = 20000;
  std::uint64_t seed = 42;

  int run() const {
    DomainCloudSpec spec;
    spec.angles = parse_angles(angles);
    spec.box_half_width = box;
    spec.sample_count = samples;
    spec.max_points = max_points;
    spec.seed = seed;
    const Comparison cmp =
        side == "le" ? Comparison::kLessEqual : Comparison::kGreaterEqual;

    const DomainCloud cloud = domain_cloud(threshold, cmp, spec);
    std::string csv = "x,y,z,rel_error\n";
    for (const CloudPoint& p : cloud.points) {
      csv += io::format_double(p.a.x) + "," + io::format_double(p.a.y) + "," +
             io::format_double(p.a.z) + "," + io::format_double(p.rel) + "\n";
    }
    io::atomic_write(output, csv);

    const std::string text =
        "matched-samples: " + std::to_string(cloud.matched_samples) +
        "\nemitted-points: " + std::to_string(cloud.points.size()) +
        "\ndomain-file: " + output + "\n";
    nlohmann::json j;
    j["matched_samples"] = cloud.matched_samples;
    j["emitted_points"] = cloud.points.size();
    j["domain_file"] = output;
    std::cout << (format == "json" ? j.dump(2) + "\n" : text);
    return kExitOk;
  }
};

struct SimulateCmd {
  std::string output = "poses.csv";
  std::string truth_output;
  std::string s = "0,0,0";
  std::string b = "1,1,1";
  std::string angles = "orthogonal";
  std::size_t poses = 24;
  double noise = 0.0;
  double g = kStandardGravity;
  std::uint64_t seed = 42;

  int run() const {
    TruthScenario scenario;
    scenario.params.shift = parse_triplet(s);
    scenario.params.scale = parse_triplet(b);
    scenario.params.angles = parse_angles(angles);
    scenario.g = GravityConstant(g);
    scenario.pose_directions = fibonacci_directions(poses);
    scenario.noise_std = noise;
    scenario.seed = seed;

    const std::vector<RawSample> rows = generate(scenario).samples;
    io::write_samples_file(output, rows);
    if (!truth_output.empty())
      io::save_params(truth_output, {scenario.params, scenario.g, std::nullopt});

    std::cout << "simulated " << rows.size() << " poses -> " << output << "\n";
    return kExitOk;
  }
};

void add_format_flag(CLI::App* cmd, std::string& format) {
  cmd->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{
      "Three-axis accelerometer calibration toolkit: bias, scale and axis\n"
      "non-orthogonality correction plus worst-case error analysis.\n"
      "Raw recordings are in sensor units; corrected output is in m/s^2."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "accelcal 0.1.0");

  CalibrateCmd calibrate;
  CLI::App* cal = app.add_subcommand(
      "calibrate", "Fit shift, scale and axis angles from a static-pose recording");
  cal->add_option("input", calibrate.input, "Pose CSV (header ax,ay,az, sensor units)")
      ->required();
  cal->add_option("--output", calibrate.output, "Params file to write")
      ->capture_default_str();
  cal->add_option("--g", calibrate.g, "Gravity magnitude, m/s^2")->capture_default_str();
  cal->add_option("--angle-tol", calibrate.angle_tol,
                  "Half-width of the admissible angle band around pi/2, relative")
      ->check(CLI::Range(0.0, kMaxAngleTol))
      ->capture_default_str();
  cal->add_option("--restarts", calibrate.restarts, "Extra jittered fit starts")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  cal->add_option("--seed", calibrate.seed, "Seed for jittered restarts")
      ->capture_default_str();
  add_format_flag(cal, calibrate.format);

  CorrectCmd correct;
  CLI::App* cor = app.add_subcommand(
      "correct", "Apply a params file to a raw recording, emitting m/s^2 samples");
  cor->add_option("params", correct.params, "Params JSON from calibrate")->required();
  cor->add_option("input", correct.input, "Raw CSV recording")->required();
  cor->add_option("--output", correct.output, "Corrected CSV to write")
      ->capture_default_str();

  CLI::App* ana = app.add_subcommand("analyze", "Worst-case magnitude error bounds");
  ana->require_subcommand(1);
  AnalyzeCmd analyze_abs;
  AnalyzeCmd analyze_rel;
  analyze_rel.relative = true;
  const auto add_analyze = [&](AnalyzeCmd& cmd, const char* name, const char* help) {
    CLI::App* sub = ana->add_subcommand(name, help);
    sub->add_option("--g", cmd.g, "Gravity magnitude, m/s^2")->capture_default_str();
    sub->add_option("--angle-tol", cmd.angle_tol,
                    "Half-width of the admissible angle band around pi/2, relative")
        ->check(CLI::Range(0.0, kMaxAngleTol))
        ->capture_default_str();
    sub->add_option("--output", cmd.output, "Also write the report to this file");
    add_format_flag(sub, cmd.format);
    return sub;
  };
  add_analyze(analyze_abs, "max-error",
              "Largest |nonorthogonal - orthogonal| magnitude at gravity scale");
  CLI::App* rel =
      add_analyze(analyze_rel, "relative-error",
                  "Largest relative magnitude error over a cube of readings");
  rel->add_option("--box", analyze_rel.box,
                  "Cube half-width in m/s^2 (default: 4 times g)")
      ->check(CLI::PositiveNumber);

  HistogramCmd hist;
  CLI::App* hi = app.add_subcommand(
      "histogram", "Relative-error distribution over uniform cube samples (CSV)");
  hi->add_option("--angles", hist.angles, "'orthogonal' or phi,psi,theta in radians")
      ->capture_default_str();
  hi->add_option("--box", hist.box, "Cube half-width, m/s^2")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  hi->add_option("--samples", hist.samples, "Sample count")->capture_default_str();
  hi->add_option("--bins", hist.bins, "Bin count")->capture_default_str();
  hi->add_option("--range", hist.range, "Histogram range: LO HI")->expected(2);
  hi->add_option("--seed", hist.seed, "Sampling seed")->capture_default_str();
  hi->add_option("--output", hist.output, "CSV to write")->capture_default_str();
  add_format_flag(hi, hist.format);

  DomainsCmd domains;
  CLI::App* dom = app.add_subcommand(
      "domains", "Point cloud of readings on one side of a relative-error level (CSV)");
  dom->add_option("--angles", domains.angles, "'orthogonal' or phi,psi,theta in radians")
      ->capture_default_str();
  dom->add_option("--threshold", domains.threshold, "Relative-error level")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  dom->add_option("--side", domains.side, "Keep samples <= (le) or >= (ge) the level")
      ->check(CLI::IsMember({"le", "ge"}))
      ->capture_default_str();
  dom->add_option("--box", domains.box, "Cube half-width, m/s^2")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  dom->add_option("--samples", domains.samples, "Sample count")->capture_default_str();
  dom->add_option("--max-points", domains.max_points, "Point budget for the CSV")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}))
      ->capture_default_str();
  dom->add_option("--seed", domains.seed, "Sampling seed")->capture_default_str();
  dom->add_option("--output", domains.output, "CSV to write")->capture_default_str();
  add_format_flag(dom, domains.format);

  SimulateCmd simulate;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Generate a synthetic static-pose recording plus optional truth params");
  sim->add_option("--poses", simulate.poses, "Number of poses")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}))
      ->capture_default_str();
  sim->add_option("--noise", simulate.noise, "Per-component noise sigma, sensor units")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sim->add_option("--s", simulate.s, "Truth shift sx,sy,sz, sensor units")
      ->capture_default_str();
  sim->add_option("--b", simulate.b, "Truth scale bx,by,bz")->capture_default_str();
  sim->add_option("--angles", simulate.angles, "'orthogonal' or phi,psi,theta in radians")
      ->capture_default_str();
  sim->add_option("--g", simulate.g, "Gravity magnitude, m/s^2")->capture_default_str();
  sim->add_option("--seed", simulate.seed, "Noise seed")->capture_default_str();
  sim->add_option("--output", simulate.output, "Pose CSV to write")->capture_default_str();
  sim->add_option("--truth-output", simulate.truth_output,
                  "Also write the truth params JSON here");

  int rc = kExitOk;
  cal->callback([&] { rc = calibrate.run(); });
  cor->callback([&] { rc = correct.run(); });
  ana->get_subcommand("max-error")->callback([&] { rc = analyze_abs.run(); });
  rel->callback([&] {
    analyze_rel.box_given = rel->count("--box") > 0;
    rc = analyze_rel.run();
  });
  hi->callback([&] { rc = hist.run(); });
  dom->callback([&] { rc = domains.run(); });
  sim->callback([&] { rc = simulate.run(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMalformedInput;
  } catch (const IllPosedDatasetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIllPosed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMalformedInput;
  }
  return rc;
}

}  // namespace

int run(int argc, const char* const* argv) { return dispatch(argc, argv); }

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("accelcal");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace accelcal::cli
