#include "dnode/model.hpp"

#include <fstream>

#include <json.hpp>

#include "dnode/errors.hpp"

namespace dnode {

std::string to_string(SolverMethod m) {
    return m == SolverMethod::Euler ? "euler" : "rk4";
}

SolverMethod solver_from_string(const std::string& s) {
    if (s == "euler") return SolverMethod::Euler;
    if (s == "rk4") return SolverMethod::Rk4;
    throw ConfigError("unknown solver '" + s + "'");
}

std::size_t count_parameters(const ModelParams& model) {
    std::size_t n = model.trend.parameter_count() + model.residual.parameter_count();
    if (model.seasonality) n += model.seasonality->parameter_count();
    return n;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = std::vector<double>(m.data(), m.data() + m.size());
    return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) throw ConfigError("checkpoint: matrix size mismatch");
    Matrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& components) {
    nlohmann::json j;
    for (const auto& [name, params] : components) {
        nlohmann::json c;
        if (params.has_flow()) c["w"] = matrix_to_json(params.w);
        c["dec_w"] = matrix_to_json(params.dec_w);
        c["dec_b"] = params.dec_b;
        j["components"][name] = std::move(c);
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
    out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read checkpoint '" + path + "'");
    nlohmann::json j;
    in >> j;
    Checkpoint out;
    for (const auto& [name, c] : j.at("components").items()) {
        ComponentParams params;
        if (c.contains("w")) params.w = matrix_from_json(c.at("w"));
        params.dec_w = matrix_from_json(c.at("dec_w"));
        params.dec_b = c.at("dec_b").get<Vec>();
        out.emplace(name, std::move(params));
    }
    return out;
}

} // namespace dnode
