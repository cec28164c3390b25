#pragma once

// JSON layouts for scenarios, datasets and latent tables.
//
//   scenario: {"m": 1, "H": 2, "T": 3,
//              "strata": [{"lambdas": [..T+1..], "pis": [..T..]}, ...]}
//   dataset:  {"m": 1, "strata": [{"e": [..T+1..], "n": [..T..]}, ...]}
//   latent:   {"strata": [{"T": 3, "x": [[x00], [x10, x11], ..]}, ...]}
//
// In the latent layout row t lists x_{t0} .. x_{tt}.

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "tiered_review/errors.hpp"
#include "tiered_review/model.hpp"

namespace tiered_review {

/// Malformed file content; the message carries line context when known.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

inline nlohmann::json parse_json(const std::string& text, const std::string& what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        const std::size_t byte = err.byte > 0 ? err.byte - 1 : 0;
        throw ParseError(what + ": line " + std::to_string(line_of(text, byte)) + ": " + err.what());
    }
}

template <class T>
T field(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ParseError(where + ": missing field \"" + key + "\"");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& err) {
        throw ParseError(where + ": field \"" + key + "\" has the wrong type (" + err.what() + ")");
    }
}

}  // namespace detail

inline nlohmann::json to_json(const Scenario& s) {
    nlohmann::json strata = nlohmann::json::array();
    for (const auto& p : s.strata) strata.push_back({{"lambdas", p.lambdas}, {"pis", p.pis}});
    return {{"m", s.config.mileage}, {"H", s.config.strata}, {"T", s.config.tiers}, {"strata", strata}};
}

inline nlohmann::json to_json(const Dataset& d) {
    nlohmann::json strata = nlohmann::json::array();
    for (const auto& s : d.strata) strata.push_back({{"e", s.e}, {"n", s.n}});
    return {{"m", d.config.mileage}, {"H", d.config.strata}, {"T", d.config.tiers}, {"strata", strata}};
}

inline nlohmann::json to_json(const std::vector<LatentTable>& tables) {
    nlohmann::json strata = nlohmann::json::array();
    for (const auto& x : tables) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t t = 0; t <= x.tiers(); ++t) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t s = 0; s <= t; ++s) row.push_back(x.at(t, s));
            rows.push_back(row);
        }
        strata.push_back({{"T", x.tiers()}, {"x", rows}});
    }
    return {{"strata", strata}};
}

/// Parses and validates a scenario document.
inline Scenario scenario_from_json(const std::string& text) {
    const auto doc = detail::parse_json(text, "scenario");
    Scenario s;
    s.config.mileage = detail::field<double>(doc, "m", "scenario");
    s.config.strata = detail::field<std::size_t>(doc, "H", "scenario");
    s.config.tiers = detail::field<std::size_t>(doc, "T", "scenario");
    const auto strata = detail::field<nlohmann::json>(doc, "strata", "scenario");
    if (!strata.is_array()) throw ParseError("scenario: \"strata\" must be an array");
    for (std::size_t h = 0; h < strata.size(); ++h) {
        const std::string where = "scenario stratum " + std::to_string(h);
        s.strata.push_back({detail::field<std::vector<double>>(strata[h], "lambdas", where),
                            detail::field<std::vector<double>>(strata[h], "pis", where)});
    }
    s.validate();
    return s;
}

/// Parses and validates a dataset document. H and T are optional and are
/// inferred from the strata when absent.
inline Dataset dataset_from_json(const std::string& text) {
    const auto doc = detail::parse_json(text, "dataset");
    Dataset d;
    d.config.mileage = detail::field<double>(doc, "m", "dataset");
    const auto strata = detail::field<nlohmann::json>(doc, "strata", "dataset");
    if (!strata.is_array() || strata.empty()) {
        throw ParseError("dataset: \"strata\" must be a non-empty array");
    }
    for (std::size_t h = 0; h < strata.size(); ++h) {
        const std::string where = "dataset stratum " + std::to_string(h);
        d.strata.push_back({detail::field<std::vector<Count>>(strata[h], "e", where),
                            detail::field<std::vector<Count>>(strata[h], "n", where)});
    }
    d.config.strata = doc.contains("H") ? detail::field<std::size_t>(doc, "H", "dataset")
                                        : d.strata.size();
    d.config.tiers = doc.contains("T") ? detail::field<std::size_t>(doc, "T", "dataset")
                                       : d.strata.front().n.size();
    validate_dataset(d);
    return d;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace tiered_review
