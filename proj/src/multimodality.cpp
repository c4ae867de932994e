#include "mmenc/multimodality.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "mmenc/error.hpp"
#include "mmenc/io.hpp"

namespace mmenc {

std::string_view to_string(TestId t)
{
    switch (t) {
    case TestId::Weak: return "Weak";
    case TestId::WeakSLIP: return "WeakSLIP";
    case TestId::Strict: return "Strict";
    case TestId::StrictSLIP: return "StrictSLIP";
    case TestId::NonlinearIntegration: return "NonlinearIntegration";
    }
    return "Weak";
}

std::string_view display_name(TestId t)
{
    switch (t) {
    case TestId::Weak: return "Weak test of multimodality";
    case TestId::WeakSLIP: return "Weak SLIP test";
    case TestId::Strict: return "Strict test of multimodality";
    case TestId::StrictSLIP: return "Strict SLIP test";
    case TestId::NonlinearIntegration: return "Non-linear integration test";
    }
    return "";
}

TestId parse_test_id(std::string_view s)
{
    for (const auto t : kAllTests)
        if (to_string(t) == s) return t;
    throw DataError(fmt::format("unknown test id '{}'", s));
}

ModalityClass ModelClasses::of(std::string_view model_id) const
{
    for (const auto& s : specs_)
        if (s.model_id == model_id) return s.modality;
    throw ConfigError(fmt::format("model '{}' has no modality class", model_id));
}

std::vector<std::string> ModelClasses::with_class(bool (*pred)(ModalityClass)) const
{
    std::vector<std::string> out;
    for (const auto& s : specs_)
        if (pred(s.modality)) out.push_back(s.model_id);
    return out;
}

bool weak_pass(const ComparisonVerdict& v, const ModelClasses& classes)
{
    return v.decided() && counts_as_multimodal(classes.of(v.winner));
}

bool slip_pass(const ComparisonVerdict& v, std::string_view multimodal_id)
{
    return v.decided() && v.winner == multimodal_id;
}

std::optional<std::size_t> nonlinear_candidate(const BootstrapCI& ci, const SurvivorMask& mask, std::size_t electrode,
                                               const ModelClasses& classes)
{
    for (const auto m : rank_models(ci, mask, electrode))
        if (integrates_nonlinearly(classes.of(ci.models[m].model_id))) return m;
    return std::nullopt;
}

namespace {

bool is_linear(ModalityClass c) { return c == ModalityClass::LinearIntegration; }

void check_evidence(const AlignmentEvidence& ev, std::string_view name, std::size_t n_el)
{
    if (!ev.ci || !ev.mask || !ev.scores) throw StageOrderError(fmt::format("{} evidence is incomplete", name));
    if (ev.battery.size() != n_el || ev.slip.size() != n_el)
        throw DataError(fmt::format("{}: verdict tables do not cover every electrode", name));
}

}  // namespace

TestSuite run_tests(const AlignmentEvidence& language, const AlignmentEvidence& vision, const ModelClasses& classes,
                    const SlipPair& slip, const ComparisonConfig& config)
{
    const std::array<const AlignmentEvidence*, 2> ev{&language, &vision};
    if (!language.ci || !vision.ci) throw StageOrderError("test evidence is missing bootstrap intervals");
    if (language.ci->electrode_ids != vision.ci->electrode_ids)
        throw DataError("language- and vision-aligned datasets cover different electrodes");
    const std::size_t n_el = language.ci->n_electrodes();
    check_evidence(language, "language", n_el);
    check_evidence(vision, "vision", n_el);
    if (slip.multimodal.empty() || slip.unimodal.empty()) throw ConfigError("SLIP contrast pair is not configured");
    const auto linear_ids = classes.with_class(is_linear);
    if (linear_ids.empty()) throw ConfigError("nonlinear integration test needs LinearIntegration models in the battery");

    TestSuite suite;
    suite.outcomes.resize(n_el * kTestCount);
    std::vector<std::size_t> strict_passers;

    for (std::size_t e = 0; e < n_el; ++e) {
        const auto id = language.ci->electrode_ids[e];
        auto row = [&](TestId t) -> TestOutcome& {
            auto& o = suite.outcomes[e * kTestCount + static_cast<std::size_t>(t)];
            o.electrode_id = id;
            o.test = t;
            return o;
        };
        auto& weak = row(TestId::Weak);
        auto& weak_slip = row(TestId::WeakSLIP);
        for (int a = 0; a < 2; ++a) {
            weak.alignment_pass[a] = weak_pass(ev[a]->battery[e], classes);
            weak_slip.alignment_pass[a] = slip_pass(ev[a]->slip[e], slip.multimodal);
        }
        weak.pass = weak.alignment_pass[0] || weak.alignment_pass[1];
        weak.support = fmt::format("{}|{}", language.battery[e].winner, vision.battery[e].winner);
        weak_slip.pass = weak_slip.alignment_pass[0] || weak_slip.alignment_pass[1];
        weak_slip.support = fmt::format("{}|{}", language.slip[e].winner, vision.slip[e].winner);

        auto& strict = row(TestId::Strict);
        strict.pass = weak.alignment_pass[0] && weak.alignment_pass[1];
        strict.alignment_pass = {strict.pass, strict.pass};
        strict.support = weak.support;
        auto& strict_slip = row(TestId::StrictSLIP);
        strict_slip.pass = weak_slip.alignment_pass[0] && weak_slip.alignment_pass[1];
        strict_slip.alignment_pass = {strict_slip.pass, strict_slip.pass};
        strict_slip.support = weak_slip.support;

        auto& nl = row(TestId::NonlinearIntegration);
        nl.evaluated = strict.pass;
        if (strict.pass) strict_passers.push_back(e);
    }

    // Candidate vs every linear-integration model on the strict passers; one
    // FDR family per alignment.
    std::array<std::vector<std::optional<std::size_t>>, 2> candidate;
    std::array<std::vector<std::vector<std::size_t>>, 2> pair_rows;  // per strict passer, rows in pairs[a]
    for (int a = 0; a < 2; ++a) {
        const auto& ci = *ev[a]->ci;
        std::vector<std::size_t> linear_idx;
        for (const auto& l : linear_ids) linear_idx.push_back(ci.model_index(l));
        auto& pairs = suite.nonlinear.pairs[a];
        for (const auto e : strict_passers) {
            const auto c = nonlinear_candidate(ci, *ev[a]->mask, e, classes);
            candidate[a].push_back(c);
            pair_rows[a].emplace_back();
            if (!c) continue;
            for (const auto l : linear_idx) {
                const std::array<std::size_t, 2> subset{*c, l};
                pair_rows[a].back().push_back(pairs.size());
                pairs.push_back(compare_electrode(ci, *ev[a]->mask, *ev[a]->scores, e, subset, "nonlinear", config));
            }
        }
        apply_fdr(pairs, config.alpha);
    }
    for (std::size_t i = 0; i < strict_passers.size(); ++i) {
        auto& nl = suite.outcomes[strict_passers[i] * kTestCount + static_cast<std::size_t>(TestId::NonlinearIntegration)];
        std::array<bool, 2> ok{false, false};
        std::array<std::string, 2> who;
        for (int a = 0; a < 2; ++a) {
            if (!candidate[a][i]) continue;
            who[a] = ev[a]->ci->models[*candidate[a][i]].model_id;
            ok[a] = std::all_of(pair_rows[a][i].begin(), pair_rows[a][i].end(), [&](std::size_t r) {
                const auto& v = suite.nonlinear.pairs[a][r];
                return v.decided() && v.winner == who[a];
            });
        }
        nl.pass = ok[0] && ok[1];
        nl.alignment_pass = {nl.pass, nl.pass};
        nl.support = fmt::format("{}|{}", who[0], who[1]);
    }
    return suite;
}

std::vector<RegionSummary> aggregate_regions(const TestSuite& suite, std::span<const ElectrodeMeta> electrodes,
                                             std::span<const std::string> known_labels)
{
    const std::set<std::string, std::less<>> known(known_labels.begin(), known_labels.end());
    std::vector<std::string> unknown;
    std::map<std::int64_t, const ElectrodeMeta*> meta;
    for (const auto& m : electrodes) {
        meta[m.electrode_id] = &m;
        if (!known.contains(m.region_label)) unknown.push_back(fmt::format("{} ('{}')", m.electrode_id, m.region_label));
    }
    if (!unknown.empty())
        throw DataError(fmt::format("electrodes with unknown region labels: {}", fmt::join(unknown, ", ")));

    std::map<std::string, RegionSummary> by_region;
    const std::size_t n_el = suite.outcomes.size() / kTestCount;
    for (std::size_t e = 0; e < n_el; ++e) {
        const auto id = suite.at(e, TestId::Weak).electrode_id;
        const auto it = meta.find(id);
        if (it == meta.end()) throw DataError(fmt::format("electrode {} has no metadata", id));
        auto& r = by_region[it->second->region_label];
        r.region = it->second->region_label;
        ++r.n_electrodes;
        for (const auto t : kAllTests) {
            const auto& o = suite.at(e, t);
            auto& c = r.counts[static_cast<std::size_t>(t)];
            c[0] += o.alignment_pass[0] ? 1 : 0;
            c[1] += o.alignment_pass[1] ? 1 : 0;
            c[2] += o.pass ? 1 : 0;
        }
        const auto& weak = suite.at(e, TestId::Weak);
        if (weak.alignment_pass[0] && weak.alignment_pass[1]) r.both_alignments = true;
    }
    std::vector<RegionSummary> out;
    for (auto& [_, r] : by_region) out.push_back(std::move(r));
    return out;
}

void write_outcomes_csv(const std::filesystem::path& path, const TestSuite& suite,
                        std::span<const ElectrodeMeta> electrodes, std::uint64_t config_hash)
{
    CsvWriter w(path, {"electrode", "subject", "region", "test", "language", "vision", "pass", "evaluated", "support",
                       "config_hash"});
    const auto hash = hex64(config_hash);
    for (const auto& o : suite.outcomes) {
        const auto meta = std::find_if(electrodes.begin(), electrodes.end(),
                                       [&](const ElectrodeMeta& m) { return m.electrode_id == o.electrode_id; });
        w.cell(o.electrode_id);
        if (meta != electrodes.end())
            w.cell(meta->subject_id).cell(meta->region_label);
        else
            w.empty().empty();
        w.cell(to_string(o.test)).cell(o.alignment_pass[0]).cell(o.alignment_pass[1]).cell(o.pass).cell(o.evaluated);
        w.cell(o.support).cell(hash);
        w.end_row();
    }
    w.finish();
}

TestSuite read_outcomes_csv(const std::filesystem::path& path)
{
    const auto t = read_csv(path);
    const auto src = path.string();
    const auto c_e = t.column("electrode", src), c_t = t.column("test", src), c_l = t.column("language", src),
               c_v = t.column("vision", src), c_p = t.column("pass", src), c_ev = t.column("evaluated", src),
               c_s = t.column("support", src);
    if (t.rows.size() % kTestCount != 0) throw DataError(src + ": outcome table is not electrode-complete");
    TestSuite suite;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        TestOutcome o;
        o.electrode_id = parse_int(r[c_e], src);
        o.test = parse_test_id(r[c_t]);
        if (static_cast<std::size_t>(o.test) != i % kTestCount)
            throw DataError(fmt::format("{}: row {} is out of test order", src, i + 2));
        o.alignment_pass = {parse_int(r[c_l], src) != 0, parse_int(r[c_v], src) != 0};
        o.pass = parse_int(r[c_p], src) != 0;
        o.evaluated = parse_int(r[c_ev], src) != 0;
        o.support = r[c_s];
        suite.outcomes.push_back(std::move(o));
    }
    return suite;
}

void write_regions_csv(const std::filesystem::path& path, std::span<const RegionSummary> regions,
                       std::uint64_t config_hash)
{
    std::vector<std::string> header{"region", "n_electrodes"};
    for (const auto t : kAllTests)
        for (const auto* col : {"language", "vision", "combined"}) {
            header.push_back(fmt::format("{}_{}_count", to_string(t), col));
            header.push_back(fmt::format("{}_{}_percent", to_string(t), col));
        }
    header.insert(header.end(), {"both_alignments", "no_multimodal", "config_hash"});
    CsvWriter w(path, header);
    const auto hash = hex64(config_hash);
    for (const auto& r : regions) {
        w.cell(r.region).cell(r.n_electrodes);
        for (const auto t : kAllTests)
            for (std::size_t c = 0; c < 3; ++c) w.cell(r.counts[static_cast<std::size_t>(t)][c]).cell(r.percent(t, c));
        w.cell(r.both_alignments).cell(r.no_multimodal()).cell(hash);
        w.end_row();
    }
    w.finish();
}

std::string format_test_table(const TestSuite& suite, std::size_t n_electrodes, std::uint64_t config_hash)
{
    std::string out = fmt::format("Multimodal integration tests ({} electrodes, config {})\n\n", n_electrodes,
                                  hex64(config_hash));
    out += fmt::format("{:<30} {:>10} {:>10}\n", "Test", "Language", "Vision");
    std::array<std::array<std::size_t, 2>, kTestCount> counts{};
    std::array<std::vector<std::int64_t>, kTestCount> passing;
    for (const auto& o : suite.outcomes) {
        const auto t = static_cast<std::size_t>(o.test);
        counts[t][0] += o.alignment_pass[0] ? 1 : 0;
        counts[t][1] += o.alignment_pass[1] ? 1 : 0;
        if (o.pass) passing[t].push_back(o.electrode_id);
    }
    for (const auto t : kAllTests) {
        const auto i = static_cast<std::size_t>(t);
        out += fmt::format("{:<30} {:>10} {:>10}\n", display_name(t), counts[i][0], counts[i][1]);
    }
    out += "\nPassing electrodes\n";
    for (const auto t : kAllTests) {
        const auto& p = passing[static_cast<std::size_t>(t)];
        out += fmt::format("{:<30} {}\n", display_name(t), p.empty() ? std::string("-") : fmt::format("{}", fmt::join(p, " ")));
    }
    return out;
}

}  // namespace mmenc
