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
#include <cstdio>
#include <memory>
#include <mutex>
#include <numbers>

#include "ctnet/data.hpp"
#include "ctnet/error.hpp"
#include "json_util.hpp"

namespace ctnet {
namespace {

using json = nlohmann::json;

// Shared by every dataset so that splits agree on cross-modal structure.
constexpr std::uint64_t kStructureSeed = 0xC7A7E5EEDULL;
constexpr int kDctOrder = 4;
constexpr int kAttackRank = 4;
constexpr double kLatentGain = 0.6;
constexpr double kFlattenWeight = 0.85;
constexpr double kPrintContrast = 0.6;

// Per-modality amplitude of the modality-independent spoof perturbation.
constexpr std::array<double, 3> kAttackGain{0.9, 0.6, 0.6};

struct Field {
    int channels = 0;
    int side = 0;
    std::vector<double> values;  // channels * side * side

    double& at(int c, int y, int x) { return values[(static_cast<std::size_t>(c) * side + y) * side + x]; }
    double at(int c, int y, int x) const { return values[(static_cast<std::size_t>(c) * side + y) * side + x]; }
};

// Smooth random field from a low-order 2D cosine basis, scaled to unit RMS.
std::vector<double> smooth_field(int side, Rng& rng)
{
    std::array<double, kDctOrder * kDctOrder> coef{};
    for (int u = 0; u < kDctOrder; ++u) {
        for (int v = 0; v < kDctOrder; ++v) {
            coef[u * kDctOrder + v] = rng.normal() / (1.0 + u + v);
        }
    }
    std::vector<double> out(static_cast<std::size_t>(side) * side, 0.0);
    double sq = 0.0;
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            double s = 0.0;
            for (int u = 0; u < kDctOrder; ++u) {
                const double cy = std::cos(std::numbers::pi * u * (y + 0.5) / side);
                for (int v = 0; v < kDctOrder; ++v) {
                    s += coef[u * kDctOrder + v] * cy * std::cos(std::numbers::pi * v * (x + 0.5) / side);
                }
            }
            out[static_cast<std::size_t>(y) * side + x] = s;
            sq += s * s;
        }
    }
    const double rms = std::sqrt(sq / static_cast<double>(out.size()));
    if (rms > 0.0) {
        for (auto& v : out) {
            v /= rms;
        }
    }
    return out;
}

struct ModalityStructure {
    Field base;                           // face template
    std::vector<std::vector<double>> map;  // latent j -> field (channels*side*side)
    std::array<std::vector<std::vector<double>>, 3> attack_basis;  // per attack, rank kAttackRank
};

double blob(double x, double y, double cx, double cy, double sx, double sy)
{
    const double dx = (x - cx) / sx;
    const double dy = (y - cy) / sy;
    return std::exp(-(dx * dx + dy * dy));
}

Field face_template(ModalityId m, int side)
{
    const int channels = modality_channels(m);
    Field f{channels, side, std::vector<double>(static_cast<std::size_t>(channels) * side * side)};
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double u = (x + 0.5) / side;
            const double v = (y + 0.5) / side;
            const double face = blob(u, v, 0.5, 0.52, 0.32, 0.42);
            const double eyes = blob(u, v, 0.36, 0.42, 0.07, 0.05) + blob(u, v, 0.64, 0.42, 0.07, 0.05);
            const double mouth = blob(u, v, 0.5, 0.74, 0.14, 0.04);
            const double nose = blob(u, v, 0.5, 0.55, 0.05, 0.1);
            for (int c = 0; c < channels; ++c) {
                double value = 0.0;
                switch (m) {
                case ModalityId::Rgb: {
                    static constexpr std::array<double, 3> skin{0.9, 0.55, 0.4};
                    value = skin[c] * face - 0.5 * eyes - 0.3 * mouth - 0.2;
                    break;
                }
                case ModalityId::Ir:
                    value = 1.1 * face - 0.6 * eyes + 0.3 * nose - 0.3;
                    break;
                case ModalityId::Depth:
                    value = 1.4 * face + 0.6 * nose - 0.1 * eyes - 0.4;
                    break;
                }
                f.at(c, y, x) = value;
            }
        }
    }
    return f;
}

std::vector<double> channel_field(int channels, int side, Rng& rng, double gain)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(channels) * side * side);
    for (int c = 0; c < channels; ++c) {
        auto f = smooth_field(side, rng);
        for (auto v : f) {
            out.push_back(gain * v);
        }
    }
    return out;
}

ModalityStructure build_structure(ModalityId m, int latent_dim, int side)
{
    ModalityStructure s;
    s.base = face_template(m, side);
    const int channels = modality_channels(m);
    Rng rng(mix_seed(kStructureSeed, 1 + index_of(m)));
    const double per_latent = kLatentGain / std::sqrt(static_cast<double>(latent_dim));
    for (int j = 0; j < latent_dim; ++j) {
        s.map.push_back(channel_field(channels, side, rng, per_latent));
    }
    for (auto a : kAttackTypes) {
        Rng arng(mix_seed(kStructureSeed, 100 + 10 * static_cast<std::uint64_t>(a) + index_of(m)));
        const double per_rank = kAttackGain[index_of(m)] / std::sqrt(static_cast<double>(kAttackRank));
        for (int r = 0; r < kAttackRank; ++r) {
            s.attack_basis[static_cast<std::size_t>(a)].push_back(channel_field(channels, side, arng, per_rank));
        }
    }
    return s;
}

// Structures are pure functions of (latent_dim, side); cache the last one.
std::shared_ptr<const std::array<ModalityStructure, 3>> structures(int latent_dim, int side)
{
    static std::mutex mutex;
    static int cached_latent = -1;
    static int cached_side = -1;
    static std::shared_ptr<const std::array<ModalityStructure, 3>> cache;
    std::lock_guard lock(mutex);
    if (cached_latent != latent_dim || cached_side != side) {
        auto fresh = std::make_shared<std::array<ModalityStructure, 3>>();
        for (auto m : kModalities) {
            (*fresh)[index_of(m)] = build_structure(m, latent_dim, side);
        }
        cache = std::move(fresh);
        cached_latent = latent_dim;
        cached_side = side;
    }
    return cache;
}

double modality_response(ModalityId m, double u)
{
    switch (m) {
    case ModalityId::Rgb:
        return std::tanh(u);
    case ModalityId::Ir:
        return u / std::sqrt(1.0 + u * u);
    case ModalityId::Depth:
        return 0.5 * std::log1p(std::exp(2.0 * u));
    }
    return u;
}

struct DomainShift {
    std::array<double, 3> gain{1.0, 1.0, 1.0};
    std::array<double, 3> offset{0.0, 0.0, 0.0};
};

DomainShift domain_shift(const std::string& domain, double scale)
{
    Rng rng(mix_seed(kStructureSeed ^ 0xD0D0ULL, fnv1a(domain)));
    DomainShift d;
    for (std::size_t m = 0; m < 3; ++m) {
        d.gain[m] = 1.0 + scale * rng.uniform(-1.0, 1.0);
        d.offset[m] = scale * rng.uniform(-1.0, 1.0);
    }
    return d;
}

AttackType draw_attack(const std::array<double, 3>& mix, Rng& rng)
{
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
        acc += mix[a];
        if (u < acc) {
            return kAttackTypes[a];
        }
    }
    for (std::size_t a = 3; a-- > 0;) {
        if (mix[a] > 0.0) {
            return kAttackTypes[a];
        }
    }
    return AttackType::Print;
}

std::string format_id(const std::string& split, std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu", index);
    return split + "-" + buf;
}

}  // namespace

void GeneratorConfig::validate() const
{
    if (latent_dim < 1) {
        throw ConfigError("generator.latent_dim must be >= 1");
    }
    if (image_side < 4) {
        throw ConfigError("generator.image_side must be >= 4");
    }
    double sum = 0.0;
    for (double p : attack_mix) {
        if (!(p >= 0.0)) {
            throw ConfigError("generator.attack_mix entries must be >= 0");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("generator.attack_mix must sum to 1");
    }
    for (const auto& [name, counts] : splits) {
        if (counts.n_live < 0 || counts.n_spoof < 0) {
            throw ConfigError("generator.splits." + name + ": counts must be >= 0");
        }
    }
    if (!(noise_std >= 0.0)) {
        throw ConfigError("generator.noise_std must be >= 0");
    }
    if (!(domain_shift_scale >= 0.0)) {
        throw ConfigError("generator.domain_shift_scale must be >= 0");
    }
    if (domains.empty()) {
        throw ConfigError("generator.domains must not be empty");
    }
}

std::string GeneratorConfig::hash() const
{
    json j = *this;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

void to_json(json& j, const GeneratorConfig& c)
{
    json splits = json::object();
    for (const auto& [name, counts] : c.splits) {
        splits[name] = {{"n_live", counts.n_live}, {"n_spoof", counts.n_spoof}};
    }
    j = json{{"latent_dim", c.latent_dim},
             {"image_side", c.image_side},
             {"splits", splits},
             {"attack_mix", {{"print", c.attack_mix[0]}, {"replay", c.attack_mix[1]}, {"mask", c.attack_mix[2]}}},
             {"domain_shift_scale", c.domain_shift_scale},
             {"domains", c.domains},
             {"noise_std", c.noise_std},
             {"seed", c.seed}};
}

using detail::read_opt;
using detail::reject_unknown;

void from_json(const json& j, GeneratorConfig& c)
{
    const std::string where = "generator";
    reject_unknown(j,
                   {"latent_dim", "image_side", "splits", "attack_mix", "domain_shift_scale", "domains", "noise_std",
                    "seed"},
                   where);
    read_opt(j, "latent_dim", c.latent_dim, where);
    read_opt(j, "image_side", c.image_side, where);
    read_opt(j, "domain_shift_scale", c.domain_shift_scale, where);
    read_opt(j, "domains", c.domains, where);
    read_opt(j, "noise_std", c.noise_std, where);
    read_opt(j, "seed", c.seed, where);
    if (auto it = j.find("splits"); it != j.end()) {
        if (!it->is_object()) {
            throw ConfigError("generator.splits: expected an object");
        }
        c.splits.clear();
        for (const auto& [name, counts] : it->items()) {
            const std::string w = "generator.splits." + name;
            reject_unknown(counts, {"n_live", "n_spoof"}, w);
            SplitCounts sc;
            read_opt(counts, "n_live", sc.n_live, w);
            read_opt(counts, "n_spoof", sc.n_spoof, w);
            c.splits[name] = sc;
        }
    }
    if (auto it = j.find("attack_mix"); it != j.end()) {
        const std::string w = "generator.attack_mix";
        reject_unknown(*it, {"print", "replay", "mask"}, w);
        c.attack_mix = {0.0, 0.0, 0.0};
        read_opt(*it, "print", c.attack_mix[0], w);
        read_opt(*it, "replay", c.attack_mix[1], w);
        read_opt(*it, "mask", c.attack_mix[2], w);
    }
}

MultiModalSample generate_sample(const GeneratorConfig& config, const std::string& split, std::size_t index)
{
    const auto counts = config.splits.at(split);
    const int side = config.image_side;
    const int k = config.latent_dim;
    const auto structure_ptr = structures(k, side);
    const auto& structure = *structure_ptr;

    Rng rng(mix_seed(mix_seed(config.seed, fnv1a(split)), index));

    MultiModalSample s;
    s.id = format_id(split, index);
    s.label = index < static_cast<std::size_t>(counts.n_live) ? Label::Live : Label::Spoof;
    s.domain = config.domains[index % config.domains.size()];

    std::vector<double> z(static_cast<std::size_t>(k));
    for (auto& v : z) {
        v = rng.normal();
    }
    if (s.label == Label::Spoof) {
        s.attack = draw_attack(config.attack_mix, rng);
    }
    const DomainShift shift = domain_shift(s.domain, config.domain_shift_scale);
    const std::size_t plane = static_cast<std::size_t>(side) * side;

    // Attack parameters are drawn up front in a fixed order so every sample
    // consumes the stream identically regardless of which branches apply.
    std::array<std::array<double, kAttackRank>, 3> w{};
    for (auto& wm : w) {
        for (auto& v : wm) {
            v = rng.normal();
        }
    }
    const double tilt_x = 0.6 * rng.normal();
    const double tilt_y = 0.6 * rng.normal();
    const double plane_offset = 0.3 * rng.normal();
    const double moire_fx = 6.0 + static_cast<double>(rng.below(5));
    const double moire_fy = 6.0 + static_cast<double>(rng.below(5));
    const double moire_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double ir_offset = 0.15 * rng.normal();
    Rng distortion_rng(rng.next());
    const auto distortion = smooth_field(side, distortion_rng);

    for (auto m : kModalities) {
        const auto mi = index_of(m);
        const auto& st = structure[mi];
        const int channels = modality_channels(m);
        std::vector<double> pre = st.base.values;
        for (int j = 0; j < k; ++j) {
            const auto& col = st.map[static_cast<std::size_t>(j)];
            for (std::size_t p = 0; p < pre.size(); ++p) {
                pre[p] += col[p] * z[static_cast<std::size_t>(j)];
            }
        }
        if (s.attack) {
            const auto& basis = st.attack_basis[static_cast<std::size_t>(*s.attack)];
            for (int r = 0; r < kAttackRank; ++r) {
                const double coeff = w[mi][static_cast<std::size_t>(r)];
                for (std::size_t p = 0; p < pre.size(); ++p) {
                    pre[p] += basis[static_cast<std::size_t>(r)][p] * coeff;
                }
            }
        }
        std::vector<double> post(pre.size());
        for (std::size_t p = 0; p < pre.size(); ++p) {
            post[p] = modality_response(m, pre[p]);
        }

        if (s.attack) {
            const AttackType a = *s.attack;
            for (int c = 0; c < channels; ++c) {
                for (int y = 0; y < side; ++y) {
                    for (int x = 0; x < side; ++x) {
                        const std::size_t p = static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * side + x;
                        const double u = (x + 0.5) / side - 0.5;
                        const double v = (y + 0.5) / side - 0.5;
                        if (a == AttackType::Print || a == AttackType::Replay) {
                            if (m == ModalityId::Depth) {
                                const double flat = tilt_x * u + tilt_y * v + plane_offset;
                                post[p] = kFlattenWeight * flat + (1.0 - kFlattenWeight) * post[p];
                            }
                            if (a == AttackType::Print && m == ModalityId::Rgb) {
                                post[p] = kPrintContrast * post[p] + (1.0 - kPrintContrast) * 0.2;
                            }
                            if (a == AttackType::Replay && m == ModalityId::Rgb) {
                                post[p] += 0.25 * std::sin(2.0 * std::numbers::pi * (moire_fx * (x + 0.5) + moire_fy * (y + 0.5)) / side +
                                                           moire_phase);
                            }
                        } else {
                            if (m == ModalityId::Ir) {
                                post[p] = 0.5 * post[p] + ir_offset;
                            } else if (m == ModalityId::Depth) {
                                post[p] += 0.3 * distortion[static_cast<std::size_t>(y) * side + x];
                            } else {
                                static constexpr std::array<double, 3> tint{0.85, 1.0, 1.12};
                                post[p] *= tint[static_cast<std::size_t>(c)];
                            }
                        }
                    }
                }
            }
        }

        std::vector<float> values(post.size());
        for (std::size_t p = 0; p < post.size(); ++p) {
            const double v = shift.gain[mi] * post[p] + shift.offset[mi] + config.noise_std * rng.normal();
            values[p] = static_cast<float>(v);
        }
        s.tensors[mi] = Tensor({static_cast<std::uint32_t>(channels), static_cast<std::uint32_t>(side),
                                static_cast<std::uint32_t>(side)},
                               std::move(values));
    }
    return s;
}

Dataset generate_synthetic_dataset(const GeneratorConfig& config, const std::string& split)
{
    config.validate();
    auto it = config.splits.find(split);
    if (it == config.splits.end()) {
        throw ConfigError("generator.splits has no entry for split '" + split + "'");
    }
    Dataset d;
    d.config_hash = config.hash();
    d.seed = config.seed;
    d.split = split;
    const std::size_t n = static_cast<std::size_t>(it->second.n_live) + static_cast<std::size_t>(it->second.n_spoof);
    d.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.samples.push_back(generate_sample(config, split, i));
    }
    return d;
}

}  // namespace ctnet
