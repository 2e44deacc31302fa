// Copyright 2026 The nisqmaps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nisqmaps/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

namespace nisqmaps {

using nlohmann::json;

namespace {

json complex_matrix(const CMat& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

CMat complex_matrix(const json& j, Index d) {
    if (!j.is_array() || static_cast<Index>(j.size()) != d) throw Error(ErrorCode::Parse, "expected a d x d complex matrix");
    CMat m(d, d);
    for (Index r = 0; r < d; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Index>(row.size()) != d) throw Error(ErrorCode::Parse, "complex matrix row length");
        for (Index c = 0; c < d; ++c) {
            const json& z = row.at(static_cast<std::size_t>(c));
            if (!z.is_array() || z.size() != 2) throw Error(ErrorCode::Parse, "complex entries are [re, im] pairs");
            m(r, c) = cplx(z.at(0).get<double>(), z.at(1).get<double>());
        }
    }
    return m;
}

json real_matrix(const RMat& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

RMat real_matrix(const json& j, Index d) {
    if (!j.is_array() || static_cast<Index>(j.size()) != d) throw Error(ErrorCode::Parse, "expected a d x d real matrix");
    RMat m(d, d);
    for (Index r = 0; r < d; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Index>(row.size()) != d) throw Error(ErrorCode::Parse, "real matrix row length");
        for (Index c = 0; c < d; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

template <class F>
auto parsing(const char* what, F&& body) {
    try {
        return body();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string(what) + ": " + e.what());
    }
}

Index read_dim(const json& j) {
    const Index d = j.at("d").get<Index>();
    if (d < 1 || d > 4096) throw Error(ErrorCode::Parse, "dimension out of range");
    return d;
}

std::vector<std::string_view> split_on(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (std::string_view line : split_on(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

} // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    double x = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw Error(ErrorCode::Parse, "not a number: '" + std::string(text) + "'");
    }
    return x;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::Io, "sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 15];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    return sha256_hex(read_text_file(path));
}

std::string kraus_map_to_json(const KrausMap& map) {
    json j;
    j["d"] = map.dim();
    j["r"] = map.rank();
    json ks = json::array();
    for (const auto& k : map.kraus()) ks.push_back(complex_matrix(k));
    j["kraus"] = std::move(ks);
    return j.dump() + "\n";
}

KrausMap kraus_map_from_json(std::string_view text) {
    return parsing("Kraus map", [&] {
        const json j = json::parse(text);
        const Index d = read_dim(j);
        const Index r = j.at("r").get<Index>();
        const json& ks = j.at("kraus");
        if (!ks.is_array() || static_cast<Index>(ks.size()) != r) throw Error(ErrorCode::Parse, "Kraus map: r does not match");
        std::vector<CMat> kraus;
        for (const json& k : ks) kraus.push_back(complex_matrix(k, d));
        return KrausMap(std::move(kraus));
    });
}

std::string spam_model_to_json(const SpamModel& model) {
    json j;
    j["d"] = model.dim();
    j["rho0"] = complex_matrix(model.rho0);
    j["corruption"] = real_matrix(model.corruption);
    if (model.povm) {
        json es = json::array();
        for (const auto& e : model.povm->elements) es.push_back(complex_matrix(e));
        j["povm"] = std::move(es);
    }
    return j.dump() + "\n";
}

SpamModel spam_model_from_json(std::string_view text) {
    return parsing("SPAM model", [&] {
        const json j = json::parse(text);
        const Index d = j.contains("d") ? read_dim(j) : static_cast<Index>(j.at("rho0").size());
        SpamModel m;
        m.rho0 = complex_matrix(j.at("rho0"), d);
        m.corruption = real_matrix(j.at("corruption"), d);
        if (j.contains("povm")) {
            PovmSet povm;
            for (const json& e : j.at("povm")) povm.elements.push_back(complex_matrix(e, d));
            m.povm = std::move(povm);
        }
        m.validate(1e-8);
        return m;
    });
}

std::string spectrum_to_csv(const Spectrum& spec) {
    std::string out = "re,im\n";
    for (const cplx& v : spec.values) out += format_double(v.real()) + "," + format_double(v.imag()) + "\n";
    return out;
}

Spectrum spectrum_from_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines.front() != "re,im") throw Error(ErrorCode::Parse, "spectrum CSV must start with 're,im'");
    std::vector<cplx> values;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cols = split_on(lines[i], ',');
        if (cols.size() != 2) throw Error(ErrorCode::Parse, "spectrum CSV rows need two columns");
        values.emplace_back(parse_double(cols[0]), parse_double(cols[1]));
    }
    return Spectrum::from_eigenvalues(std::move(values));
}

std::string dataset_to_text(const TomographyDataset& ds) {
    json header;
    header["n"] = ds.n;
    header["N_s"] = ds.shots;
    header["gate_convention"] = kGateConvention;
    header["qubit_order"] = kQubitOrder;
    std::string out = header.dump() + "\n";
    for (const auto& rec : ds.records) {
        out += rec.mode.prep_string();
        out += ';';
        out += rec.mode.basis_string();
        for (double f : rec.freqs) {
            out += ';';
            out += format_double(f);
        }
        out += '\n';
    }
    return out;
}

TomographyDataset dataset_from_text(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw Error(ErrorCode::BadDataset, "dataset: empty file");
    TomographyDataset ds;
    parsing("dataset header", [&] {
        const json header = json::parse(lines.front());
        ds.n = header.at("n").get<int>();
        ds.shots = header.at("N_s").get<std::uint64_t>();
        if (header.at("gate_convention").get<std::string>() != kGateConvention) {
            throw Error(ErrorCode::BadDataset, "dataset: unsupported gate convention");
        }
        if (header.contains("qubit_order") && header.at("qubit_order").get<std::string>() != kQubitOrder) {
            throw Error(ErrorCode::BadDataset, "dataset: unsupported qubit order");
        }
        return 0;
    });
    if (ds.n < 1 || ds.n > 12) throw Error(ErrorCode::BadDataset, "dataset: n out of range");
    const auto d = static_cast<std::size_t>(ds.dim());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cols = split_on(lines[i], ';');
        if (cols.size() != 2 + d) throw Error(ErrorCode::BadDataset, "dataset: row has the wrong number of fields");
        TomographyRecord rec{PauliMode::parse(cols[0], cols[1]), {}};
        if (rec.mode.n() != ds.n) throw Error(ErrorCode::BadDataset, "dataset: mode length differs from n");
        for (std::size_t k = 0; k < d; ++k) rec.freqs.push_back(parse_double(cols[2 + k]));
        ds.records.push_back(std::move(rec));
    }
    ds.validate();
    return ds;
}

std::string du_fit_to_json(const DUFit& fit) {
    json j;
    j["p_star"] = fit.p_star;
    j["r_star"] = fit.r_star;
    j["sd_star"] = fit.sd_star;
    j["sigma"] = fit.sigma;
    j["samples_per_point"] = fit.samples_per_point;
    j["metric"] = fit.metric == FitMetric::SpectralDistance ? "spectral_distance" : "wasserstein2";
    j["grid"] = {{"p", fit.grid_p}, {"r", fit.grid_r}};
    j["scores"] = fit.scores;
    const DURadii radii = du_radii(fit.p_star, fit.r_star);
    j["R_plus"] = radii.r_plus;
    j["R_minus"] = radii.r_minus ? json(*radii.r_minus) : json(nullptr);
    j["support"] = to_string(classify_support(fit));
    return j.dump() + "\n";
}

std::string fit_report_to_json(const FitReport& report, bool include_wall_time) {
    json j;
    j["initial_loss"] = report.initial_loss;
    j["final_loss"] = report.final_loss;
    j["iterations"] = report.iterations;
    j["best_iteration"] = report.best_iteration;
    j["no_progress"] = report.no_progress;
    j["loss_trace"] = report.loss_trace;
    if (include_wall_time) j["wall_time"] = report.wall_time;
    return j.dump() + "\n";
}

} // namespace nisqmaps
