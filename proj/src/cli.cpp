#include "dichotomy/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "dichotomy/spectral.hpp"

namespace dichotomy {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw Error(ErrorKind::ParseError, "matrix must be a non-empty array of rows");
  const std::size_t cols = rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols) throw Error(ErrorKind::ParseError, "ragged matrix rows");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

json sequence_json(const Sequence& x) {
  json states = json::array();
  for (int n = x.first(); n <= x.last(); ++n) {
    json state = json::array();
    for (int i = 0; i < x.dim(); ++i) state.push_back(x[n](i));
    states.push_back(std::move(state));
  }
  return {{"first", x.first()}, {"states", std::move(states)}};
}

json solution_json(const WindowSolution& s) {
  return {{"lambda", s.lambda.theta},      {"window", s.window},         {"residual_norm", number(s.residual_norm)},
          {"amplitude", s.amplitude},      {"iterations", s.iterations}, {"kind", to_string(s.kind)},
          {"x", sequence_json(s.x)}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  file << content;
  file.flush();
  if (!file) throw Error(ErrorKind::IoError, "failed writing " + path);
}

bool usage_error(ErrorKind kind) {
  return kind == ErrorKind::ParseError || kind == ErrorKind::InvalidArgument || kind == ErrorKind::MeshTooCoarse ||
         kind == ErrorKind::BadRanks || kind == ErrorKind::BadLoopIndex;
}

int report_setup_error(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  if (e.kind() == ErrorKind::IoError) return exit_code::io_error;
  return usage_error(e.kind()) ? exit_code::usage : exit_code::numerical_failure;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  try {
    if (!doc.is_object()) throw Error(ErrorKind::ParseError, "config must be a JSON object");
    if (doc.contains("schema_version") && doc.at("schema_version").get<int>() != kSchemaVersion) {
      throw Error(ErrorKind::ParseError, "unsupported schema_version");
    }
    RunConfig config;
    const json& model = doc.at("model");
    config.model.name = model.at("name").get<std::string>();
    config.model.k = model.value("k", 1);
    if (model.contains("params")) {
      for (const auto& [key, value] : model.at("params").items()) config.model.params[key] = value.get<double>();
    }
    if (model.contains("matrices")) {
      for (const auto& m : model.at("matrices")) config.model.matrices.push_back(matrix_from_json(m));
    }

    config.mesh.k = config.model.k;
    if (doc.contains("mesh")) {
      const json& mesh = doc.at("mesh");
      config.mesh.k = mesh.value("k", config.model.k);
      config.mesh.M = mesh.value("M", config.mesh.M);
      if (mesh.contains("refinements")) {
        for (const auto& r : mesh.at("refinements")) {
          config.mesh.refinements.push_back({r.at("loop").get<int>(), r.at("factor").get<int>()});
        }
      }
    }
    config.window = doc.value("window", config.window);
    if (doc.contains("tolerances")) {
      const json& tol = doc.at("tolerances");
      config.tolerances.hyperbolicity = tol.value("hyperbolicity", config.tolerances.hyperbolicity);
      config.tolerances.rank = tol.value("rank", config.tolerances.rank);
      config.tolerances.newton = tol.value("newton", config.tolerances.newton);
      config.tolerances.trigger = tol.value("trigger", config.tolerances.trigger);
    }
    if (doc.contains("outputs")) {
      const json& outputs = doc.at("outputs");
      config.outputs.report = outputs.value("report", "");
      config.outputs.sweep_csv = outputs.value("sweep_csv", "");
    }

    const Tolerances& t = config.tolerances;
    if (!(t.hyperbolicity > 0.0 && t.rank > 0.0 && t.newton > 0.0 && t.trigger > 0.0)) {
      throw Error(ErrorKind::ParseError, "tolerances must be positive");
    }
    if (config.mesh.k != config.model.k) throw Error(ErrorKind::ParseError, "mesh.k differs from model.k");
    if (config.window < 1) throw Error(ErrorKind::ParseError, "window must be positive");
    return config;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw Error(ErrorKind::ParseError, "cannot read config " + path);
  try {
    return parse_config(json::parse(file));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
}

json to_json(const RunConfig& config) {
  json matrices = json::array();
  for (const auto& m : config.model.matrices) matrices.push_back(matrix_json(m));
  json refinements = json::array();
  for (const auto& r : config.mesh.refinements) refinements.push_back({{"loop", r.loop}, {"factor", r.factor}});
  json model = {{"name", config.model.name}, {"k", config.model.k}, {"params", config.model.params}};
  if (!matrices.empty()) model["matrices"] = matrices;
  return {{"schema_version", kSchemaVersion},
          {"model", model},
          {"mesh", {{"k", config.mesh.k}, {"M", config.mesh.M}, {"refinements", refinements}}},
          {"window", config.window},
          {"tolerances",
           {{"hyperbolicity", config.tolerances.hyperbolicity},
            {"rank", config.tolerances.rank},
            {"newton", config.tolerances.newton},
            {"trigger", config.tolerances.trigger}}},
          {"outputs", {{"report", config.outputs.report}, {"sweep_csv", config.outputs.sweep_csv}}}};
}

ParameterMesh build_mesh(const MeshConfig& config) {
  ParameterMesh mesh = config.k == 1 ? make_circle_mesh(config.M) : make_torus_mesh(config.k, config.M);
  for (const auto& r : config.refinements) mesh = refine_loop(mesh, r.loop, r.factor);
  return mesh;
}

CertifyOptions certify_options(const RunConfig& config) {
  CertifyOptions opts;
  opts.sweep.window = config.window;
  opts.sweep.rank_tol = config.tolerances.rank;
  opts.sweep.trigger = config.tolerances.trigger;
  opts.sweep.hyperbolicity_tol = config.tolerances.hyperbolicity;
  opts.sweep.newton.tol = config.tolerances.newton;
  opts.sweep.newton.hyperbolicity_tol = config.tolerances.hyperbolicity;
  return opts;
}

json to_json(const BifurcationReport& report) {
  json doc;
  doc["schema_version"] = kSchemaVersion;

  json assumptions = json::array();
  for (const auto& a : report.assumption_status) {
    assumptions.push_back({{"name", a.name}, {"evaluated", a.evaluated}, {"passed", a.passed}, {"detail", a.detail}});
  }
  doc["assumption_status"] = assumptions;

  if (report.certificate) {
    const auto& c = *report.certificate;
    doc["certificate"] = {{"w1_plus", c.w1_plus.bits},
                          {"w1_minus", c.w1_minus.bits},
                          {"mismatch", c.mismatch},
                          {"any_mismatch", c.any_mismatch},
                          {"dimension_bound", c.dimension_bound ? json(*c.dimension_bound) : json(nullptr)}};
  } else {
    doc["certificate"] = nullptr;
  }

  json sweep = json::array();
  for (const auto& r : report.sweep) {
    sweep.push_back({{"vertex_index", r.vertex_index},
                     {"theta", r.theta.theta},
                     {"sigma_min", r.sigma_min},
                     {"sigma_max", r.sigma_max},
                     {"kernel_dim", r.kernel_dim},
                     {"gap_ratio", number(r.gap_ratio)}});
  }
  doc["sweep"] = sweep;
  doc["candidates"] = report.candidates;

  json solutions = json::array();
  for (const auto& s : report.solutions) solutions.push_back(solution_json(s));
  doc["solutions"] = solutions;

  json attempts = json::array();
  for (const auto& a : report.newton_attempts) {
    attempts.push_back(
        {{"candidate_vertex", a.candidate_vertex}, {"start_vertex", a.start_vertex}, {"outcome", a.outcome}});
  }
  doc["newton_attempts"] = attempts;
  doc["conclusion"] = to_string(report.conclusion);
  doc["notes"] = report.notes;
  doc["failure"] = report.failure ? json(*report.failure) : json(nullptr);
  return doc;
}

int exit_code_for(Conclusion conclusion) {
  switch (conclusion) {
    case Conclusion::certified_bifurcation: return exit_code::ok;
    case Conclusion::no_certificate: return exit_code::no_certificate;
    case Conclusion::assumptions_violated: return exit_code::assumptions_violated;
    case Conclusion::numerical_failure: return exit_code::numerical_failure;
  }
  return exit_code::numerical_failure;
}

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::string row_text;
  std::istringstream lines(text);
  while (std::getline(lines, row_text, '\n')) {
    std::istringstream pieces(row_text);
    std::string piece;
    while (std::getline(pieces, piece, ';')) {
      for (char& ch : piece) {
        if (ch == ',') ch = ' ';
      }
      std::istringstream tokens(piece);
      std::vector<double> row;
      std::string token;
      while (tokens >> token) {
        std::size_t used = 0;
        double value = 0.0;
        try {
          value = std::stod(token, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != token.size()) throw Error(ErrorKind::ParseError, "not a number: '" + token + "'");
        row.push_back(value);
      }
      if (!row.empty()) rows.push_back(std::move(row));
    }
  }
  if (rows.empty()) throw Error(ErrorKind::ParseError, "empty matrix");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw Error(ErrorKind::ParseError, "ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  if (m.rows() != m.cols()) throw Error(ErrorKind::ParseError, "matrix is not square");
  return m;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records, int k) {
  out << "vertex_index";
  for (int j = 0; j < k; ++j) out << ",theta_" << j;
  out << ",sigma_min,kernel_dim\n";
  char buffer[64];
  auto put = [&](double v) {
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    out << ',' << buffer;
  };
  for (const auto& r : records) {
    out << r.vertex_index;
    for (double t : r.theta.theta) put(t);
    put(r.sigma_min);
    out << ',' << r.kernel_dim << '\n';
  }
}

int cmd_spectral(const std::string& input, std::ostream& out, std::ostream& err) {
  Matrix a;
  try {
    std::string text = input;
    std::error_code ec;
    if (std::filesystem::is_regular_file(input, ec)) {
      std::ifstream file(input);
      std::ostringstream buffer;
      buffer << file.rdbuf();
      text = buffer.str();
    }
    a = parse_matrix(text);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::usage;
  }

  try {
    const HyperbolicSplitting split = hyperbolic_splitting(a);
    const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, " ", "\n", "  ", "");
    out << std::setprecision(17);
    out << "margin: " << split.margin << '\n';
    out << "k_s: " << split.stable_dim() << '\n';
    out << "k_u: " << split.unstable_dim() << '\n';
    out << "stable_basis:\n";
    if (split.stable_dim() > 0) out << split.stable_basis.format(fmt) << '\n';
    out << "unstable_basis:\n";
    if (split.unstable_dim() > 0) out << split.unstable_basis.format(fmt) << '\n';
    out << "stable_projector:\n" << split.stable_projector.format(fmt) << '\n';
    return exit_code::ok;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.kind() == ErrorKind::HyperbolicityViolation || e.kind() == ErrorKind::NotInvertible) {
      return exit_code::not_hyperbolic;
    }
    return exit_code::usage;
  }
}

int cmd_certify(const RunConfig& config, std::ostream& out, std::ostream& err) {
  NonlinearFamily fam;
  ParameterMesh mesh;
  try {
    fam = build_model(config.model);
    mesh = build_mesh(config.mesh);
  } catch (const Error& e) {
    return report_setup_error(e, err);
  }

  const BifurcationReport report = certify_bifurcation(fam, mesh, certify_options(config));
  json doc = to_json(report);
  doc["config"] = to_json(config);

  try {
    const std::string text = doc.dump(2) + "\n";
    if (config.outputs.report.empty()) {
      out << text;
    } else {
      write_file(config.outputs.report, text);
      out << "conclusion: " << to_string(report.conclusion) << '\n';
    }
    if (!config.outputs.sweep_csv.empty()) {
      std::ostringstream csv;
      write_sweep_csv(csv, report.sweep, mesh.k);
      write_file(config.outputs.sweep_csv, csv.str());
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::io_error;
  }
  if (report.failure) err << "numerical failure: " << *report.failure << '\n';
  return exit_code_for(report.conclusion);
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  SweepResult result;
  int k = 0;
  try {
    const NonlinearFamily fam = build_model(config.model);
    const ParameterMesh mesh = build_mesh(config.mesh);
    if (config.window < std::max(1, fam.linearization.decay_probe)) {
      throw Error(ErrorKind::WindowTooSmall, "window " + std::to_string(config.window) + " below decay probe " +
                                                 std::to_string(fam.linearization.decay_probe));
    }
    SweepOptions opts = certify_options(config).sweep;
    opts.attempt_newton = false;
    result = sweep(fam, mesh, opts);
    k = mesh.k;
  } catch (const Error& e) {
    return report_setup_error(e, err);
  }

  std::ostringstream csv;
  write_sweep_csv(csv, result.records, k);
  if (config.outputs.sweep_csv.empty()) {
    out << csv.str();
    return exit_code::ok;
  }
  try {
    write_file(config.outputs.sweep_csv, csv.str());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::io_error;
  }
  return exit_code::ok;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  std::vector<std::string> names;
  if (suite == "all") {
    names = kVerifySuites;
  } else if (std::find(kVerifySuites.begin(), kVerifySuites.end(), suite) != kVerifySuites.end()) {
    names = {suite};
  } else {
    err << "error: unknown suite '" << suite << "' (expected index, right_inverse, splice, adjoint, contour or all)\n";
    return exit_code::usage;
  }

  bool all_passed = true;
  for (const auto& name : names) {
    const SuiteResult result = run_suite(name, seed);
    out << name << ": " << (result.passed() ? "PASS" : "FAIL") << " (" << result.cases - result.failures.size() << "/"
        << result.cases << ")\n";
    for (const auto& [case_seed, message] : result.failures) out << "  seed " << case_seed << ": " << message << '\n';
    all_passed = all_passed && result.passed();
  }
  return all_passed ? exit_code::ok : exit_code::verify_failed;
}

}  // namespace dichotomy
