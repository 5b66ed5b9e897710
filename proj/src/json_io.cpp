#include "equimorse/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

namespace equimorse::io {

nlohmann::json parse_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Validation, std::string("malformed JSON: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Validation, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

nlohmann::json payload(const nlohmann::json& doc, const std::string& kind) {
  if (!doc.is_object()) fail(ErrorKind::Validation, "problem document must be a JSON object");
  if (!doc.contains("payload")) return doc;
  if (doc.contains("kind") && doc.at("kind").get<std::string>() != kind)
    fail(ErrorKind::Validation, "expected a " + kind + " problem, got " + doc.at("kind").get<std::string>());
  return doc.at("payload");
}

nlohmann::json options(const nlohmann::json& doc) {
  if (doc.is_object() && doc.contains("options")) return doc.at("options");
  return nlohmann::json::object();
}

hamflow::HamiltonianGerm germ_from_json(const nlohmann::json& j) {
  using hamflow::HamiltonianGerm;
  if (!j.is_object()) fail(ErrorKind::Validation, "Hamiltonian must be a JSON object");
  if (!j.contains("preset")) return HamiltonianGerm::from_json(j);
  const std::string p = j.at("preset").get<std::string>();
  if (p == "rotation") return HamiltonianGerm::rotation(j.at("alpha").get<double>());
  if (p == "hyperbolic") return HamiltonianGerm::hyperbolic(j.at("lambda").get<double>());
  if (p == "quartic") return HamiltonianGerm::quartic(j.at("s").get<double>());
  fail(ErrorKind::Validation, "unknown Hamiltonian preset '" + p + "'");
}

Vec vec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorKind::Validation, "expected a number list");
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Vec>(v.data(), Eigen::Index(v.size()));
}

nlohmann::json vec_to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Mat mat_from_rows(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) fail(ErrorKind::Validation, "expected a list of matrix rows");
  const int r = int(rows.size()), c = int(rows[0].size());
  Mat m(r, c);
  for (int i = 0; i < r; ++i) {
    if (int(rows[i].size()) != c) fail(ErrorKind::Shape, "ragged matrix rows");
    for (int k = 0; k < c; ++k) m(i, k) = rows[i][k].get<double>();
  }
  return m;
}

Mat basis_from_json(const nlohmann::json& cols, int N) {
  if (!cols.is_array()) fail(ErrorKind::Validation, "expected a list of basis vectors");
  Mat b(N, int(cols.size()));
  for (size_t i = 0; i < cols.size(); ++i) {
    Vec v = vec_from_json(cols[i]);
    if (v.size() != N) fail(ErrorKind::Shape, "basis vector has wrong dimension");
    b.col(Eigen::Index(i)) = v;
  }
  return b;
}

namespace {

void flatten(const nlohmann::json& j, const std::string& key, std::vector<std::pair<std::string, std::string>>& out) {
  auto scalar_list = [](const nlohmann::json& a) {
    return std::all_of(a.begin(), a.end(), [](const nlohmann::json& x) { return x.is_primitive(); });
  };
  if (j.is_object() && !j.empty()) {
    for (auto& [k, v] : j.items()) flatten(v, key.empty() ? k : key + "." + k, out);
  } else if (j.is_array() && !j.empty() && !scalar_list(j)) {
    for (size_t i = 0; i < j.size(); ++i) flatten(j[i], key + "[" + std::to_string(i) + "]", out);
  } else {
    out.push_back({key, j.is_string() ? j.get<std::string>() : j.dump()});
  }
}

}  // namespace

std::string to_table(const nlohmann::json& j) {
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(j, "", rows);
  size_t w = 0;
  for (auto& r : rows) w = std::max(w, r.first.size());
  std::string out;
  for (auto& [k, v] : rows) out += k + std::string(w - k.size() + 2, ' ') + v + "\n";
  return out;
}

}  // namespace equimorse::io
