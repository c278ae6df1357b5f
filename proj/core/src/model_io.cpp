#include "wlogit/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wlogit/error.hpp"

namespace wlogit {

namespace {

using nlohmann::json;

json to_json_vec(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v(i))) {
            a.push_back(v(i));
        } else {
            a.push_back(nullptr);
        }
    }
    return a;
}

double num(const json& j, const char* what) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number()) throw DataError(std::string("model field '") + what + "' is not a number");
    return j.get<double>();
}

Vector from_json_vec(const json& a, const char* what) {
    if (!a.is_array()) throw DataError(std::string("model field '") + what + "' is not an array");
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = num(a[i], what);
    return v;
}

const json& field(const json& j, const char* name) {
    const auto it = j.find(name);
    if (it == j.end()) throw DataError(std::string("model is missing field '") + name + "'");
    return *it;
}

}  // namespace

std::string serialize_model(const WLogitModel& model) {
    json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["p"] = model.p();
    j["beta_hat"] = to_json_vec(model.beta_hat);
    j["beta_tilde_hat"] = to_json_vec(model.beta_tilde_hat);
    j["beta_tilde0_hat"] = to_json_vec(model.beta_tilde0_hat);
    j["support"] = model.support;
    j["lambda_hat"] = model.lambda_hat;
    j["k_hat"] = model.k_hat;
    j["m_hat"] = model.m_hat;
    j["gamma_k"] = model.gamma_k;
    j["gamma_m"] = model.gamma_m;
    j["loglik"] = std::isfinite(model.loglik) ? json(model.loglik) : json(nullptr);
    j["h_convention"] = to_string(model.h_convention);
    j["standardization"] = {{"center", to_json_vec(model.standardization.center)},
                            {"scale", to_json_vec(model.standardization.scale)}};
    j["feature_names"] = model.feature_names;
    return j.dump(2) + "\n";
}

WLogitModel deserialize_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("model is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("model JSON must be an object");
    if (field(j, "format") != kModelFormat) throw DataError("not a wlogit model file");
    const int version = field(j, "version").get<int>();
    if (version < 1 || version > kModelVersion) {
        throw DataError("unsupported model version " + std::to_string(version));
    }

    WLogitModel m;
    try {
        const auto p = field(j, "p").get<Eigen::Index>();
        m.beta_hat = from_json_vec(field(j, "beta_hat"), "beta_hat");
        m.beta_tilde_hat = from_json_vec(field(j, "beta_tilde_hat"), "beta_tilde_hat");
        if (j.contains("beta_tilde0_hat")) {
            m.beta_tilde0_hat = from_json_vec(j["beta_tilde0_hat"], "beta_tilde0_hat");
        }
        m.support = field(j, "support").get<std::vector<Eigen::Index>>();
        m.lambda_hat = num(field(j, "lambda_hat"), "lambda_hat");
        m.k_hat = field(j, "k_hat").get<Eigen::Index>();
        m.m_hat = field(j, "m_hat").get<Eigen::Index>();
        m.gamma_k = num(field(j, "gamma_k"), "gamma_k");
        m.gamma_m = num(field(j, "gamma_m"), "gamma_m");
        m.loglik = num(field(j, "loglik"), "loglik");
        m.h_convention = parse_h_convention(field(j, "h_convention").get<std::string>());
        const json& st = field(j, "standardization");
        m.standardization.center = from_json_vec(field(st, "center"), "center");
        m.standardization.scale = from_json_vec(field(st, "scale"), "scale");
        m.feature_names = field(j, "feature_names").get<std::vector<std::string>>();

        if (m.beta_hat.size() != p || m.beta_tilde_hat.size() != p ||
            m.standardization.center.size() != p || m.standardization.scale.size() != p) {
            throw DataError("model vectors do not match p = " + std::to_string(p));
        }
        if (!m.feature_names.empty() && static_cast<Eigen::Index>(m.feature_names.size()) != p) {
            throw DataError("feature_names does not match p");
        }
        for (Eigen::Index s : m.support) {
            if (s < 0 || s >= p) throw DataError("support index out of range");
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("malformed model: ") + e.what());
    }
    return m;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::random_device rd;
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
        out << contents;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DataError("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DataError("cannot move output into place at '" + path.string() + "'");
    }
}

void save_model(const WLogitModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_model(model));
}

WLogitModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

}  // namespace wlogit
