#pragma once

#include <string>

#include "equimorse/field.hpp"
#include "equimorse/hamflow.hpp"
#include "json.hpp"

namespace equimorse::io {

// Reads a JSON document; Validation on a missing file or malformed text.
nlohmann::json read_json_file(const std::string& path);
nlohmann::json parse_json(const std::string& text);

// Problem files may wrap the object as {"kind": ..., "payload": {...}, "options": {...}}.
// Returns the payload and checks the kind when one is present.
nlohmann::json payload(const nlohmann::json& doc, const std::string& expected_kind);
nlohmann::json options(const nlohmann::json& doc);

// Germ from explicit terms or a preset: {"preset": "rotation", "alpha": a},
// {"preset": "hyperbolic", "lambda": l}, {"preset": "quartic", "s": s}.
hamflow::HamiltonianGerm germ_from_json(const nlohmann::json& j);

Vec vec_from_json(const nlohmann::json& j);
nlohmann::json vec_to_json(const Vec& v);
Mat mat_from_rows(const nlohmann::json& rows);  // list of rows
Mat basis_from_json(const nlohmann::json& cols, int N);  // list of column vectors

// Aligned "key  value" lines, nested keys joined with '.'.
std::string to_table(const nlohmann::json& j);

}  // namespace equimorse::io
