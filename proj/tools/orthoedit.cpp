// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0
//
// orthoedit: task-vector surgery on safetensors-layout checkpoints.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error,
// 3 numerical contract violation.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "orthoedit/container.hpp"
#include "orthoedit/error.hpp"
#include "orthoedit/lora.hpp"
#include "orthoedit/parallel.hpp"
#include "orthoedit/pipeline.hpp"
#include "orthoedit/spectrum.hpp"
#include "orthoedit/svd.hpp"
#include "orthoedit/synthetic.hpp"
#include "orthoedit/task_vector.hpp"

namespace {

using namespace orthoedit;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

constexpr std::uint64_t kDefaultSeed = 42;

struct GlobalOptions {
    unsigned threads = 1;
    std::uint64_t seed = kDefaultSeed;
};

void write_text(const std::string& path, const std::string& text) {
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void emit_json(const std::optional<std::string>& path, const nlohmann::json& doc) {
    const std::string text = doc.dump(2) + "\n";
    if (path)
        write_text(*path, text);
    else
        std::cout << text;
}

void warn_all(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings)
        fmt::print(stderr, "warning: {}\n", w);
}

LoraScaleMode parse_scale_mode(const std::string& mode) {
    return mode == "unit" ? LoraScaleMode::Unit : LoraScaleMode::AlphaOverRank;
}

// --- diff -------------------------------------------------------------------

struct DiffArgs {
    std::string base, finetuned, out;
};

void run_diff(const DiffArgs& args) {
    const auto base = read_container(args.base);
    const auto finetuned = read_container(args.finetuned);
    auto vec = diff(finetuned, base);
    vec.provenance.base_id = args.base;
    vec.provenance.finetuned_id = args.finetuned;
    write_task_vector(vec, args.out);
}

// --- merge-lora ---------------------------------------------------------------

struct MergeArgs {
    std::string adapter, out, scale_mode = "alpha-over-rank";
    std::optional<double> alpha;
};

void run_merge(const MergeArgs& args) {
    const auto adapter = lora_from_container(read_container(args.adapter), args.alpha);
    auto vec = merge_lora(adapter, parse_scale_mode(args.scale_mode));
    vec.provenance.base_id = args.adapter;
    write_task_vector(vec, args.out);
}

// --- apply ------------------------------------------------------------------

struct ApplyArgs {
    std::string base, delta, out, dtype = "preserve";
    double scale = 1.0;
};

void run_apply(const ApplyArgs& args) {
    const auto base = read_container(args.base);
    const auto vec = read_task_vector(args.delta);
    base.require_finite("base checkpoint");
    vec.delta.require_finite("task vector");
    const auto out = apply(base, vec, args.scale);
    write_container(out, args.out, args.dtype == "float32" ? DTypePolicy::ForceFloat32 : DTypePolicy::Preserve);
}

// --- edit -------------------------------------------------------------------

struct EditArgs {
    std::string recipe;
    std::optional<std::string> report;
};

void run_edit_cmd(const EditArgs& args, const GlobalOptions& global) {
    const auto recipe = EditRecipe::load(args.recipe);
    const auto result = run_edit(recipe, global.threads);
    warn_all(result.report.warnings);
    write_container(result.output, recipe.output_path, recipe.dtype_policy);
    if (args.report)
        emit_json(args.report, result.report.to_json());
    fmt::print(stderr, "edit: {} layer(s) filtered, {} plain, {} skipped in {:.3f}s\n", result.report.layers.size(),
               result.report.plain_layers.size(), result.report.skipped_layers.size(),
               result.report.elapsed_seconds);
}

// --- inspect ----------------------------------------------------------------

struct InspectArgs {
    std::string base, task, layer, out;
    std::optional<std::string> aux;
    int bins = 50;
};

void run_inspect(const InspectArgs& args, const GlobalOptions& global) {
    if (args.bins < 2)
        throw UsageError(fmt::format("--bins must be >= 2, got {}", args.bins));
    const auto base = read_container(args.base);
    const auto task = read_task_vector(args.task);
    std::optional<TaskVector> aux;
    if (args.aux)
        aux = read_task_vector(*args.aux);
    base.require_finite("base checkpoint");
    task.delta.require_finite("task vector");
    if (aux)
        aux->delta.require_finite("auxiliary vector");
    const auto aligned = align(base, aux ? &*aux : nullptr);

    std::vector<std::string> layers;
    for (const auto& [name, tensor] : task.delta)
        if (tensor.is_matrix() && matches_any(name, {args.layer}))
            layers.push_back(name);
    if (layers.empty())
        throw DataError(fmt::format("no 2-D task tensor matches '{}'", args.layer));

    std::vector<ProjectionSpectrum> spectra(layers.size());
    parallel_for(layers.size(), global.threads, [&](std::size_t i) {
        const auto basis = thin_svd(aligned.at(layers[i]), layers[i]);
        spectra[i] = project_delta(basis, Matrix::from_tensor(task.delta.at(layers[i])));
    });

    nlohmann::json summary = nlohmann::json::array();
    for (const auto& spectrum : spectra)
        summary.push_back(stats(spectrum).to_json());
    const auto hist = spectra.size() == 1 ? histogram(spectra.front(), args.bins)
                                          : histogram(spectra, args.bins, args.layer);
    write_text(args.out, histogram_csv(hist));
    std::cout << summary.dump(2) << "\n";
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
    std::size_t d = 32, k = 32, undesired = 4, general = 16;
    double amp_undesired = 1.0, amp_general = 0.01, noise = 1e-4, xi = kDefaultXiFraction;
    std::optional<std::string> out;
};

void run_bench(const BenchArgs& args, const GlobalOptions& global) {
    const auto scenario = make_scenario(args.d, args.k, global.seed, args.undesired, args.general, args.amp_undesired,
                                        args.amp_general, args.noise);
    const auto record = evaluate_separation(scenario, args.xi);
    nlohmann::json doc = {{"d", args.d},
                          {"k", args.k},
                          {"seed", global.seed},
                          {"amp_undesired", args.amp_undesired},
                          {"amp_general", args.amp_general},
                          {"noise_sigma", args.noise},
                          {"evaluation", record.to_json()}};
    emit_json(args.out, doc);
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
    std::string adapter, base, scale_mode = "alpha-over-rank";
    std::optional<double> alpha;
    int probes = 8;
    std::optional<std::string> out;
};

int run_verify(const VerifyArgs& args, const GlobalOptions& global) {
    const auto adapter = lora_from_container(read_container(args.adapter), args.alpha);
    const auto base = read_container(args.base);
    const auto report =
        verify_lora_forward(adapter, base, args.probes, global.seed, parse_scale_mode(args.scale_mode));
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : report.layers)
        layers.push_back({{"layer_name", layer.name}, {"max_relative_deviation", layer.max_relative_deviation}});
    emit_json(args.out, {{"probes", args.probes},
                         {"seed", global.seed},
                         {"tolerance", LoraForwardReport::kTolerance},
                         {"max_relative_deviation", report.max_relative_deviation},
                         {"passed", report.passed()},
                         {"layers", layers}});
    if (!report.passed()) {
        fmt::print(stderr, "error: LoRA forward check failed, max relative deviation {} > {}\n",
                   report.max_relative_deviation, LoraForwardReport::kTolerance);
        return kNumerical;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"orthoedit: task-vector extraction, spectral filtering and negation for model checkpoints"};
    app.require_subcommand(1);
    GlobalOptions global;
    global.threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--threads", global.threads, "Worker thread cap (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", global.seed, "Seed for all randomized steps")->capture_default_str();

    DiffArgs diff_args;
    auto* diff_cmd = app.add_subcommand("diff", "Task vector: finetuned - base");
    diff_cmd->add_option("--base", diff_args.base)->required();
    diff_cmd->add_option("--finetuned", diff_args.finetuned)->required();
    diff_cmd->add_option("--out", diff_args.out)->required();

    MergeArgs merge_args;
    auto* merge_cmd = app.add_subcommand("merge-lora", "Merge a LoRA adapter into a task vector (c*B*A)");
    merge_cmd->add_option("--adapter", merge_args.adapter)->required();
    merge_cmd->add_option("--out", merge_args.out)->required();
    merge_cmd->add_option("--alpha", merge_args.alpha, "Override the adapter's lora_alpha");
    merge_cmd->add_option("--scale-mode", merge_args.scale_mode)
        ->check(CLI::IsMember({"alpha-over-rank", "unit"}))
        ->capture_default_str();

    ApplyArgs apply_args;
    auto* apply_cmd = app.add_subcommand("apply", "base + scale * delta");
    apply_cmd->add_option("--base", apply_args.base)->required();
    apply_cmd->add_option("--delta", apply_args.delta)->required();
    apply_cmd->add_option("--scale", apply_args.scale)->capture_default_str();
    apply_cmd->add_option("--out", apply_args.out)->required();
    apply_cmd->add_option("--dtype", apply_args.dtype)
        ->check(CLI::IsMember({"preserve", "float32"}))
        ->capture_default_str();

    EditArgs edit_args;
    auto* edit_cmd = app.add_subcommand("edit", "Run an edit recipe (negation, ethos-uf or ethos)");
    edit_cmd->add_option("--recipe", edit_args.recipe)->required();
    edit_cmd->add_option("--report", edit_args.report, "Write the edit report JSON here");

    InspectArgs inspect_args;
    auto* inspect_cmd = app.add_subcommand("inspect", "Histogram of projected task-vector coefficients");
    inspect_cmd->add_option("--base", inspect_args.base)->required();
    inspect_cmd->add_option("--aux", inspect_args.aux);
    inspect_cmd->add_option("--task", inspect_args.task)->required();
    inspect_cmd->add_option("--layer", inspect_args.layer, "Glob selecting layers")->required();
    inspect_cmd->add_option("--bins", inspect_args.bins)->capture_default_str();
    inspect_cmd->add_option("--out", inspect_args.out, "Histogram CSV (bin,cnt)")->required();

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "Planted-subspace separation check on a synthetic layer");
    bench_cmd->add_option("--d", bench_args.d)->capture_default_str();
    bench_cmd->add_option("--k", bench_args.k)->capture_default_str();
    bench_cmd->add_option("--undesired", bench_args.undesired)->capture_default_str();
    bench_cmd->add_option("--general", bench_args.general)->capture_default_str();
    bench_cmd->add_option("--amp-undesired", bench_args.amp_undesired)->capture_default_str();
    bench_cmd->add_option("--amp-general", bench_args.amp_general)->capture_default_str();
    bench_cmd->add_option("--noise", bench_args.noise)->capture_default_str();
    bench_cmd->add_option("--xi", bench_args.xi)->capture_default_str();
    bench_cmd->add_option("--out", bench_args.out);

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "Check merged LoRA deltas against the factored forward pass");
    verify_cmd->add_option("--adapter", verify_args.adapter)->required();
    verify_cmd->add_option("--base", verify_args.base)->required();
    verify_cmd->add_option("--probes", verify_args.probes)->capture_default_str();
    verify_cmd->add_option("--alpha", verify_args.alpha);
    verify_cmd->add_option("--scale-mode", verify_args.scale_mode)
        ->check(CLI::IsMember({"alpha-over-rank", "unit"}))
        ->capture_default_str();
    verify_cmd->add_option("--out", verify_args.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*diff_cmd)
            run_diff(diff_args);
        else if (*merge_cmd)
            run_merge(merge_args);
        else if (*apply_cmd)
            run_apply(apply_args);
        else if (*edit_cmd)
            run_edit_cmd(edit_args, global);
        else if (*inspect_cmd)
            run_inspect(inspect_args, global);
        else if (*bench_cmd)
            run_bench(bench_args, global);
        else if (*verify_cmd)
            return run_verify(verify_args, global);
    } catch (const UsageError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kUsage;
    } catch (const DataError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kData;
    } catch (const NumericalError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kNumerical;
    }
    return kOk;
}
