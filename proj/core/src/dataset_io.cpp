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

#include <cmath>
#include <fstream>
#include <set>

#include "ctnet/data.hpp"
#include "ctnet/error.hpp"

namespace ctnet {

using json = nlohmann::json;

std::size_t Dataset::count(Label label) const
{
    std::size_t n = 0;
    for (const auto& s : samples) {
        n += s.label == label ? 1 : 0;
    }
    return n;
}

std::vector<Label> Dataset::labels() const
{
    std::vector<Label> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back(s.label);
    }
    return out;
}

void Dataset::validate() const
{
    std::set<std::string> ids;
    for (const auto& s : samples) {
        if (!ids.insert(s.id).second) {
            throw IntegrityError("duplicate sample id '" + s.id + "'");
        }
        if ((s.label == Label::Spoof) != s.attack.has_value()) {
            throw IntegrityError("sample '" + s.id + "': attack type must be present iff the label is spoof");
        }
        const auto& rgb = s.tensor(ModalityId::Rgb);
        for (auto m : kModalities) {
            const auto& t = s.tensor(m);
            if (t.shape.size() != 3 || t.shape[0] != static_cast<std::uint32_t>(modality_channels(m)) ||
                rgb.shape.size() != 3 || t.shape[1] != rgb.shape[1] || t.shape[2] != rgb.shape[2]) {
                throw IntegrityError("sample '" + s.id + "': unexpected " + std::string(modality_name(m)) +
                                     " tensor shape");
            }
            for (float v : t.data) {
                if (!std::isfinite(v)) {
                    throw IntegrityError("sample '" + s.id + "': non-finite " + std::string(modality_name(m)) +
                                         " value");
                }
            }
        }
    }
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& directory)
{
    namespace fs = std::filesystem;
    dataset.validate();
    fs::create_directories(directory / "tensors");
    json entries = json::array();
    for (const auto& s : dataset.samples) {
        json mods = json::object();
        for (auto m : kModalities) {
            const std::string rel = "tensors/" + s.id + "." + std::string(modality_name(m)) + ".mmt";
            write_tensor_file(directory / rel, s.tensor(m));
            mods[std::string(modality_name(m))] = rel;
        }
        entries.push_back({{"id", s.id},
                           {"label", label_name(s.label)},
                           {"attack", s.attack ? json(attack_name(*s.attack)) : json(nullptr)},
                           {"domain", s.domain},
                           {"modalities", mods}});
    }
    json manifest{{"version", 1},
                  {"config_hash", dataset.config_hash},
                  {"seed", dataset.seed},
                  {"split", dataset.split},
                  {"samples", entries}};
    std::ofstream out(directory / "manifest.json", std::ios::trunc);
    if (!out) {
        throw ArgumentError((directory / "manifest.json").string() + ": cannot open for writing");
    }
    out << manifest.dump(1) << '\n';
}

Dataset read_dataset(const std::filesystem::path& directory)
{
    const auto manifest_path = directory / "manifest.json";
    const std::string where = manifest_path.string();
    std::ifstream in(manifest_path);
    if (!in) {
        throw FormatError(where + ": manifest not found");
    }
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(where + ": " + e.what());
    }

    Dataset d;
    try {
        if (manifest.at("version").get<int>() != 1) {
            throw FormatError(where + ": unsupported manifest version");
        }
        d.config_hash = manifest.at("config_hash").get<std::string>();
        d.seed = manifest.at("seed").get<std::uint64_t>();
        d.split = manifest.at("split").get<std::string>();
        for (const auto& e : manifest.at("samples")) {
            MultiModalSample s;
            s.id = e.at("id").get<std::string>();
            const auto label = parse_label(e.at("label").get<std::string>());
            if (!label) {
                throw FormatError(where + ": sample '" + s.id + "' has an invalid label");
            }
            s.label = *label;
            if (!e.at("attack").is_null()) {
                const auto attack = parse_attack(e.at("attack").get<std::string>());
                if (!attack) {
                    throw FormatError(where + ": sample '" + s.id + "' has an invalid attack type");
                }
                s.attack = attack;
            }
            s.domain = e.at("domain").get<std::string>();
            const auto& mods = e.at("modalities");
            for (auto m : kModalities) {
                const auto rel = mods.at(std::string(modality_name(m))).get<std::string>();
                const auto path = directory / rel;
                if (!std::filesystem::exists(path)) {
                    throw IntegrityError(path.string() + ": listed in manifest but missing");
                }
                s.tensors[index_of(m)] = read_tensor_file(path);
            }
            d.samples.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw FormatError(where + ": " + e.what());
    }
    d.validate();
    return d;
}

}  // namespace ctnet
