// Copyright 2026 The ctnet Authors
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

#include <cstring>
#include <fstream>

#include "ctnet/error.hpp"
#include "ctnet/tensor.hpp"
#include "ctnet/trainer.hpp"

namespace ctnet {
namespace {

using json = nlohmann::json;

constexpr int kFormatVersion = 1;

Tensor to_tensor(const Matrix& m)
{
    Tensor t({static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())});
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            t.data[k++] = static_cast<float>(m(r, c));
        }
    }
    return t;
}

Matrix to_matrix(const Tensor& t)
{
    const auto rows = static_cast<Eigen::Index>(t.shape.at(0));
    const auto cols = static_cast<Eigen::Index>(t.shape.at(1));
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = static_cast<double>(t.data[k++]);
        }
    }
    return m;
}

Tensor vector_tensor(const Vector& v)
{
    Tensor t({static_cast<std::uint32_t>(v.size())});
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        t.data[static_cast<std::size_t>(i)] = static_cast<float>(v(i));
    }
    return t;
}

json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw FormatError(path.string() + ": not found");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw ArgumentError(path.string() + ": cannot open for writing");
    }
    out << j.dump(1) << '\n';
}

bool same_bits(const Matrix& a, const Matrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

json calibration_json(const CalibrationEntry& e)
{
    std::vector<std::string> labels;
    labels.reserve(e.labels.size());
    for (auto l : e.labels) {
        labels.emplace_back(label_name(l));
    }
    return json{{"protocol", protocol_name(e.protocol)},
                {"fill", missing_fill_name(e.fill)},
                {"lambda3", e.lambda3},
                {"threshold", e.threshold},
                {"youden_j", e.youden_j},
                {"sc_d", e.sc_d},
                {"sc_t", e.sc_t},
                {"labels", labels}};
}

CalibrationEntry calibration_from_json(const json& j, const std::string& where)
{
    CalibrationEntry e;
    const auto protocol = parse_protocol(j.at("protocol").get<std::string>());
    const auto fill = parse_missing_fill(j.at("fill").get<std::string>());
    if (!protocol || !fill) {
        throw FormatError(where + ": invalid protocol or fill");
    }
    e.protocol = *protocol;
    e.fill = *fill;
    e.lambda3 = j.at("lambda3").get<double>();
    e.threshold = j.at("threshold").get<double>();
    e.youden_j = j.at("youden_j").get<double>();
    e.sc_d = j.at("sc_d").get<std::vector<double>>();
    e.sc_t = j.at("sc_t").get<std::vector<double>>();
    for (const auto& l : j.at("labels")) {
        const auto label = parse_label(l.get<std::string>());
        if (!label) {
            throw FormatError(where + ": invalid label");
        }
        e.labels.push_back(*label);
    }
    if (e.sc_d.size() != e.labels.size() || e.sc_t.size() != e.labels.size()) {
        throw IntegrityError(where + ": calibration score and label counts differ");
    }
    return e;
}

}  // namespace

const CalibrationEntry* Checkpoint::find_calibration(TestProtocol protocol, MissingFill fill) const
{
    for (const auto& e : calibration) {
        // P4 has nothing to fill, so any entry for it matches.
        if (e.protocol == protocol && (e.fill == fill || protocol == TestProtocol::P4RgbDIr)) {
            return &e;
        }
    }
    return nullptr;
}

bool bit_equal(const Checkpoint& a, const Checkpoint& b)
{
    const auto& pa = a.params.parameters();
    const auto& pb = b.params.parameters();
    if (pa.size() != pb.size() || a.params.has_auxiliary() != b.params.has_auxiliary()) {
        return false;
    }
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i].name != pb[i].name || !same_bits(pa[i].value, pb[i].value)) {
            return false;
        }
    }
    if (a.prototypes.initialized != b.prototypes.initialized || a.prototypes.gamma != b.prototypes.gamma) {
        return false;
    }
    for (std::size_t m = 0; m < kNumModalities; ++m) {
        if (!same_bits(a.prototypes.prototypes[m], b.prototypes.prototypes[m])) {
            return false;
        }
    }
    return a.config == b.config && a.calibration == b.calibration;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& directory)
{
    std::filesystem::create_directories(directory);

    std::vector<Tensor> records;
    json index = json::array();
    std::size_t offset = 0;
    for (const auto& p : ckpt.params.parameters()) {
        records.push_back(to_tensor(p.value));
        index.push_back({{"name", p.name}, {"shape", records.back().shape}, {"offset", offset}});
        offset += 4 + 1 + 4 * records.back().shape.size() + 4 * records.back().data.size();
    }
    write_tensor_records(directory / "params.bin", records);
    write_json(directory / "params.json", json{{"version", kFormatVersion}, {"parameters", index}});

    std::vector<Tensor> protos;
    const auto d = static_cast<Eigen::Index>(ckpt.params.feature_dim());
    for (auto m : kModalities) {
        const Vector& v = ckpt.prototypes[m];
        protos.push_back(vector_tensor(ckpt.prototypes.initialized ? v : Vector::Zero(d)));
    }
    write_tensor_records(directory / "prototypes.bin", protos);
    write_json(directory / "prototypes.json", json{{"version", kFormatVersion},
                                                   {"gamma", ckpt.prototypes.gamma},
                                                   {"initialized", ckpt.prototypes.initialized},
                                                   {"modalities", {"rgb", "ir", "depth"}}});

    write_json(directory / "config.json", json{{"version", kFormatVersion},
                                               {"train", ckpt.config},
                                               {"with_auxiliary", ckpt.params.has_auxiliary()},
                                               {"training_log", ckpt.training_log}});

    json entries = json::array();
    for (const auto& e : ckpt.calibration) {
        entries.push_back(calibration_json(e));
    }
    write_json(directory / "calibration.json", json{{"version", kFormatVersion}, {"entries", entries}});
}

Checkpoint load_checkpoint(const std::filesystem::path& directory)
{
    if (!std::filesystem::is_directory(directory)) {
        throw FormatError(directory.string() + ": checkpoint directory not found");
    }
    Checkpoint ckpt;
    const json config = read_json(directory / "config.json");
    bool with_aux = false;
    try {
        ckpt.config = config.at("train").get<TrainConfig>();
        with_aux = config.at("with_auxiliary").get<bool>();
        ckpt.training_log = config.value("training_log", std::string{});
    } catch (const json::exception& e) {
        throw FormatError((directory / "config.json").string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw FormatError((directory / "config.json").string() + ": " + e.what());
    }

    ckpt.params = ModelParams::zeros(ckpt.config.model, with_aux);
    const json index = read_json(directory / "params.json");
    const auto records = read_tensor_records(directory / "params.bin");
    auto& ps = ckpt.params.parameters();
    const std::string where = (directory / "params.bin").string();
    try {
        const auto& entries = index.at("parameters");
        if (entries.size() != ps.size() || records.size() != ps.size()) {
            throw IntegrityError(where + ": expected " + std::to_string(ps.size()) + " parameters, found " +
                                 std::to_string(records.size()));
        }
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const auto name = entries[i].at("name").get<std::string>();
            const auto& t = records[i];
            if (name != ps[i].name || t.shape.size() != 2 ||
                t.shape[0] != static_cast<std::uint32_t>(ps[i].value.rows()) ||
                t.shape[1] != static_cast<std::uint32_t>(ps[i].value.cols())) {
                throw IntegrityError(where + ": parameter " + std::to_string(i) + " ('" + name +
                                     "') does not match the configured architecture");
            }
            ps[i].value = to_matrix(t);
        }
    } catch (const json::exception& e) {
        throw FormatError((directory / "params.json").string() + ": " + e.what());
    }

    const json pmeta = read_json(directory / "prototypes.json");
    const auto protos = read_tensor_records(directory / "prototypes.bin");
    if (protos.size() != kNumModalities) {
        throw IntegrityError((directory / "prototypes.bin").string() + ": expected three prototypes");
    }
    try {
        ckpt.prototypes.gamma = pmeta.at("gamma").get<double>();
        ckpt.prototypes.initialized = pmeta.at("initialized").get<bool>();
    } catch (const json::exception& e) {
        throw FormatError((directory / "prototypes.json").string() + ": " + e.what());
    }
    for (std::size_t m = 0; m < kNumModalities; ++m) {
        const auto& t = protos[m];
        if (t.shape.size() != 1 || t.shape[0] != static_cast<std::uint32_t>(ckpt.params.feature_dim())) {
            throw IntegrityError((directory / "prototypes.bin").string() + ": prototype length mismatch");
        }
        if (!ckpt.prototypes.initialized) {
            continue;
        }
        Vector v(static_cast<Eigen::Index>(t.shape[0]));
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = static_cast<double>(t.data[i]);
        }
        ckpt.prototypes.prototypes[m] = std::move(v);
    }

    const auto cal_path = directory / "calibration.json";
    if (std::filesystem::exists(cal_path)) {
        const json cal = read_json(cal_path);
        try {
            for (const auto& e : cal.at("entries")) {
                ckpt.calibration.push_back(calibration_from_json(e, cal_path.string()));
            }
        } catch (const json::exception& e) {
            throw FormatError(cal_path.string() + ": " + e.what());
        }
    }
    return ckpt;
}

}  // namespace ctnet
