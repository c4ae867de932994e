#include "mmenc/score_io.hpp"

#include <fmt/format.h>

#include "mmenc/io.hpp"

namespace mmenc {

void write_scores(const std::filesystem::path& path, const ScoreTensor& s, std::uint64_t config_hash)
{
    BinaryWriter w(path);
    w.put_magic("NSCR");
    w.put(kScoreFormatVersion);
    w.put(config_hash);
    w.put(static_cast<std::uint64_t>(s.n_electrodes()));
    w.put_array(std::span<const std::int64_t>(s.electrode_ids));
    w.put(static_cast<std::uint64_t>(s.n_bins));
    std::vector<double> centers = s.bin_centers_ms;
    centers.resize(s.n_bins, 0.0);
    w.put_array(std::span<const double>(centers));
    w.put(static_cast<std::uint32_t>(s.lambda_grid.size()));
    w.put_array(std::span<const double>(s.lambda_grid));
    w.put(static_cast<std::uint32_t>(s.models.size()));
    for (const auto& m : s.models) {
        w.put_string(m.model_id);
        w.put(static_cast<std::uint32_t>(m.layers.size()));
        for (const auto& l : m.layers) {
            w.put_string(l.layer_id);
            std::vector<std::int32_t> chosen(l.chosen_lambda.begin(), l.chosen_lambda.end());
            w.put_array(std::span<const std::int32_t>(chosen));
            for (const auto& split : l.r) w.put_array(std::span<const double>(split));
        }
        std::vector<std::int32_t> chosen(m.chosen_layer.begin(), m.chosen_layer.end());
        w.put_array(std::span<const std::int32_t>(chosen));
    }
    w.finish();
}

ScoreTensor read_scores(const std::filesystem::path& path, std::uint64_t* config_hash)
{
    BinaryReader r(path);
    r.expect_magic("NSCR");
    const auto version = r.get<std::uint32_t>();
    if (version != kScoreFormatVersion) throw DataError(fmt::format("{}: unsupported NSCR version {}", path.string(), version));
    const auto hash = r.get<std::uint64_t>();
    if (config_hash) *config_hash = hash;
    ScoreTensor s;
    const auto n_el = r.get<std::uint64_t>();
    if (n_el > (1u << 24)) throw DataError(path.string() + ": implausible electrode count");
    s.electrode_ids.resize(n_el);
    r.get_array(std::span<std::int64_t>(s.electrode_ids));
    s.n_bins = r.get<std::uint64_t>();
    if (s.n_bins > (1u << 20)) throw DataError(path.string() + ": implausible bin count");
    s.bin_centers_ms.resize(s.n_bins);
    r.get_array(std::span<double>(s.bin_centers_ms));
    s.lambda_grid.resize(r.get<std::uint32_t>());
    r.get_array(std::span<double>(s.lambda_grid));
    const auto n_models = r.get<std::uint32_t>();
    for (std::uint32_t m = 0; m < n_models; ++m) {
        ModelScores ms;
        ms.model_id = r.get_string();
        const auto n_layers = r.get<std::uint32_t>();
        for (std::uint32_t l = 0; l < n_layers; ++l) {
            LayerScores ls;
            ls.layer_id = r.get_string();
            std::vector<std::int32_t> chosen(n_el);
            r.get_array(std::span<std::int32_t>(chosen));
            ls.chosen_lambda.assign(chosen.begin(), chosen.end());
            for (auto& split : ls.r) {
                split.resize(n_el * s.n_bins);
                r.get_array(std::span<double>(split));
            }
            ms.layers.push_back(std::move(ls));
        }
        std::vector<std::int32_t> chosen(n_el);
        r.get_array(std::span<std::int32_t>(chosen));
        ms.chosen_layer.assign(chosen.begin(), chosen.end());
        s.models.push_back(std::move(ms));
    }
    return s;
}

void write_scores_csv(const std::filesystem::path& path, const ScoreTensor& s, std::uint64_t config_hash)
{
    CsvWriter w(path, {"model", "layer", "electrode", "bin", "split", "r", "lambda", "chosen_layer", "config_hash"});
    const auto hash = hex64(config_hash);
    for (std::size_t m = 0; m < s.models.size(); ++m) {
        const auto& ms = s.models[m];
        for (std::size_t l = 0; l < ms.layers.size(); ++l) {
            const auto& ls = ms.layers[l];
            for (std::size_t e = 0; e < s.n_electrodes(); ++e) {
                const bool chosen = ms.chosen_layer[e] == static_cast<int>(l);
                const double lambda = s.lambda_grid[static_cast<std::size_t>(ls.chosen_lambda[e])];
                for (std::size_t b = 0; b < s.n_bins; ++b)
                    for (int split = 0; split < kSplitCount; ++split) {
                        w.cell(ms.model_id).cell(ls.layer_id).cell(s.electrode_ids[e]).cell(b);
                        w.cell(to_string(static_cast<Split>(split)));
                        w.cell(ls.r[split][e * s.n_bins + b]).cell(lambda).cell(chosen).cell(hash);
                        w.end_row();
                    }
            }
        }
    }
    w.finish();
}

}  // namespace mmenc
