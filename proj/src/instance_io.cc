#include "lqgbound/instance_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lqgbound {
namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::kInvalidInput, "key '" + key + "': " + why);
}

Matrix to_matrix(const json& j, const std::string& key) {
  if (j.is_number()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad_key(key, "non-finite entry");
    return Matrix::Constant(1, 1, v);
  }
  if (!j.is_array() || j.empty()) bad_key(key, "expected a non-empty nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) bad_key(key, "expected rows as arrays (row-major nested arrays)");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      bad_key(key, "row " + std::to_string(r) + " has the wrong length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        bad_key(key, "entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a number");
      }
      m(r, c) = row[c].get<double>();
      if (!std::isfinite(m(r, c))) bad_key(key, "non-finite entry");
    }
  }
  return m;
}

Matrix required_matrix(const json& j, const std::string& key) {
  if (!j.contains(key)) bad_key(key, "missing");
  return to_matrix(j.at(key), key);
}

void check_dim(const json& j, const std::string& key, Eigen::Index actual) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_integer() || j.at(key).get<long long>() != actual) {
    bad_key(key, "does not match the matrix shapes (expected " + std::to_string(actual) + ")");
  }
}

Parametrization make_param(const json& root, const LqgInstance& inst) {
  const LqgSystem& sys = inst.sys;
  if (!root.contains("parametrization")) return Parametrization::UnstructuredAB(sys);
  const json& pj = root.at("parametrization");
  if (!pj.is_object() || !pj.contains("kind") || !pj.at("kind").is_string()) {
    bad_key("parametrization.kind", "missing or not a string");
  }
  const std::string kind = pj.at("kind").get<std::string>();
  Parametrization p = [&] {
    if (kind == "Unstructured") return Parametrization::Unstructured(sys);
    if (kind == "UnstructuredAB") return Parametrization::UnstructuredAB(sys);
    if (kind == "BOnly") return Parametrization::BOnly(sys);
    if (kind == "SimchoCoordinates") return Parametrization::SimchoCoordinates(sys, inst.K());
    if (kind == "Affine") {
      if (!pj.contains("basis") || !pj.at("basis").is_array()) {
        bad_key("parametrization.basis", "Affine needs a basis array");
      }
      std::vector<SystemTriple> basis;
      int i = 0;
      for (const json& e : pj.at("basis")) {
        const std::string prefix = "parametrization.basis[" + std::to_string(i++) + "].";
        SystemTriple t;
        t.A = e.contains("A") ? to_matrix(e.at("A"), prefix + "A") : Matrix::Zero(sys.A.rows(), sys.A.cols());
        t.B = e.contains("B") ? to_matrix(e.at("B"), prefix + "B") : Matrix::Zero(sys.B.rows(), sys.B.cols());
        t.C = e.contains("C") ? to_matrix(e.at("C"), prefix + "C") : Matrix::Zero(sys.C.rows(), sys.C.cols());
        basis.push_back(std::move(t));
      }
      return Parametrization::Affine({sys.A, sys.B, sys.C}, std::move(basis));
    }
    bad_key("parametrization.kind", "unknown kind '" + kind + "'");
  }();
  if (pj.contains("theta_dim") &&
      (!pj.at("theta_dim").is_number_integer() ||
       pj.at("theta_dim").get<long long>() != p.d_theta())) {
    bad_key("parametrization.theta_dim",
            "does not match the parametrization (expected " + std::to_string(p.d_theta()) + ")");
  }
  return p;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

LoadedInstance parse_instance(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::kInvalidInput, "instance must be a JSON object");

  LqgSystem sys;
  if (!root.contains("mode")) bad_key("mode", "missing");
  if (!root.at("mode").is_string()) bad_key("mode", "must be a string");
  const std::string mode = root.at("mode").get<std::string>();
  if (mode == "StateFeedback") {
    sys.mode = Mode::kStateFeedback;
  } else if (mode == "PartiallyObserved") {
    sys.mode = Mode::kPartiallyObserved;
  } else {
    bad_key("mode", "expected StateFeedback or PartiallyObserved, got '" + mode + "'");
  }
  sys.A = required_matrix(root, "A");
  sys.B = required_matrix(root, "B");
  sys.Q = required_matrix(root, "Q");
  sys.R = required_matrix(root, "R");
  sys.Sigma_w = required_matrix(root, "Sigma_w");
  if (sys.mode == Mode::kPartiallyObserved) {
    sys.C = required_matrix(root, "C");
    sys.Sigma_v = required_matrix(root, "Sigma_v");
  } else {
    if (root.contains("C")) sys.C = to_matrix(root.at("C"), "C");
    if (root.contains("Sigma_v")) sys.Sigma_v = to_matrix(root.at("Sigma_v"), "Sigma_v");
  }
  check_dim(root, "d_x", sys.A.rows());
  check_dim(root, "d_u", sys.B.cols());
  check_dim(root, "d_y", sys.C.size() ? sys.C.rows() : sys.A.rows());

  LoadedInstance out{build_instance(sys), Parametrization::UnstructuredAB(sys), fnv1a64(text)};
  out.param = make_param(root, out.inst);
  return out;
}

LoadedInstance load_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open instance file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

Matrix parse_matrix_text(const std::string& text, const std::string& what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidInput, what + ": malformed JSON: " + e.what());
  }
  if (j.is_object()) {
    if (!j.contains("K")) bad_key(what + ".K", "missing");
    return to_matrix(j.at("K"), what + ".K");
  }
  return to_matrix(j, what);
}

}  // namespace lqgbound
