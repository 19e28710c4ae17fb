#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "lifecycle/model.hpp"

namespace lifecycle {

// Parses a parameter object with exactly the ten canonical field names.
// Unknown or missing keys are rejected.
inline ModelParams params_from_json(const nlohmann::json& j) {
    static const char* keys[10] = {"r",  "mu",     "sigma",  "rho",   "lambda",
                                   "nu", "gamma1", "gamma2", "alpha", "K"};
    if (!j.is_object()) throw validation_error("parameter file must hold a JSON object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || item.key() == k;
        if (!known) throw validation_error("unknown parameter key: " + item.key());
    }
    ModelParams p;
    auto get = [&](const char* k) {
        if (!j.contains(k)) throw validation_error(std::string("missing parameter key: ") + k);
        if (!j.at(k).is_number()) throw validation_error(std::string("parameter must be numeric: ") + k);
        return j.at(k).get<double>();
    };
    p.r = get("r");
    p.mu = get("mu");
    p.sigma = get("sigma");
    p.rho = get("rho");
    p.lambda = get("lambda");
    p.nu = get("nu");
    p.gamma1 = get("gamma1");
    p.gamma2 = get("gamma2");
    p.alpha = get("alpha");
    p.K = get("K");
    return p;
}

inline ModelParams params_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open parameter file: " + path);
    nlohmann::json j;
    in >> j;
    return params_from_json(j);
}

inline nlohmann::json params_to_json(const ModelParams& p) {
    return nlohmann::json{{"r", p.r},           {"mu", p.mu},         {"sigma", p.sigma},
                          {"rho", p.rho},       {"lambda", p.lambda}, {"nu", p.nu},
                          {"gamma1", p.gamma1}, {"gamma2", p.gamma2}, {"alpha", p.alpha},
                          {"K", p.K}};
}

// Applies a "key=value" override. Throws validation_error on unknown keys or
// malformed values.
inline void apply_override(ModelParams& p, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw validation_error("override must have the form key=value: " + kv);
    const std::string key = kv.substr(0, eq);
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw validation_error("override value is not a number: " + kv);
    }
    if (key == "r") p.r = value;
    else if (key == "mu") p.mu = value;
    else if (key == "sigma") p.sigma = value;
    else if (key == "rho") p.rho = value;
    else if (key == "lambda") p.lambda = value;
    else if (key == "nu") p.nu = value;
    else if (key == "gamma1") p.gamma1 = value;
    else if (key == "gamma2") p.gamma2 = value;
    else if (key == "alpha") p.alpha = value;
    else if (key == "K") p.K = value;
    else throw validation_error("unknown parameter key: " + key);
}

}  // namespace lifecycle
