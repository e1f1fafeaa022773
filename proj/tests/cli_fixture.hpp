// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "orthoedit/container.hpp"
#include "orthoedit/lora.hpp"
#include "orthoedit/synthetic.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Runs `cmd` through the shell and returns its exit status.
inline int run_shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status))
        return -1;
    return WEXITSTATUS(status);
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// A small two-block model on disk plus the files every subcommand needs.
struct CliFixture {
    fs::path dir;
    fs::path base, finetuned, aux, task, adapter, recipe;

    explicit CliFixture(const std::string& tag) : dir(scratch_dir(tag)) {
        using namespace orthoedit;
        base = dir / "base.safetensors";
        finetuned = dir / "finetuned.safetensors";
        aux = dir / "aux.safetensors";
        task = dir / "task.safetensors";
        adapter = dir / "adapter.safetensors";
        recipe = dir / "recipe.json";

        // The attention layers carry a planted structure so that the
        // spectrum has a few strong components over a weak background.
        TensorMap b, ft, a, t;
        for (int layer = 0; layer < 2; ++layer) {
            const auto sc = make_scenario(12, 12, 100 + layer, 3, 12, 1.0, 0.01, 1e-4);
            const auto fx = build_scenario(sc);
            const std::string q = fmt::format("h.{}.attn.q_proj.weight", layer);
            const std::string v = fmt::format("h.{}.attn.v_proj.weight", layer);
            const std::string bias = fmt::format("h.{}.ln.bias", layer);
            b.insert(q, fx.base.to_tensor(DType::F32));
            b.insert(v, random_tensor({12, 12}, 10 + layer, DType::F32));
            b.insert(bias, random_tensor({12}, 20 + layer, DType::F32));
            t.insert(q, fx.delta.to_tensor(DType::F32));
            t.insert(v, random_tensor({12, 12}, 30 + layer, DType::F32));
            t.insert(bias, random_tensor({12}, 40 + layer, DType::F32));
            for (const auto& name : {q, v, bias}) {
                const auto& base_t = b.at(name);
                std::vector<double> aux_v(base_t.numel());
                const auto noise = random_tensor(base_t.shape(), 50 + layer + name.size());
                for (std::size_t i = 0; i < aux_v.size(); ++i)
                    aux_v[i] = 0.01 * noise.values()[i];
                a.insert(name, DenseTensor(base_t.shape(), DType::F32, aux_v));
            }
        }
        for (const auto& [name, tensor] : b) {
            std::vector<double> f(tensor.numel());
            for (std::size_t i = 0; i < f.size(); ++i)
                f[i] = tensor.values()[i] + t.at(name).values()[i];
            ft.insert(name, DenseTensor(tensor.shape(), DType::F32, f));
        }
        write_container(b, base);
        write_container(ft, finetuned);
        write_container(a, aux);
        write_container(t, task);

        TensorMap lora;
        lora.metadata()["lora_alpha"] = "8";
        for (int layer = 0; layer < 2; ++layer) {
            const std::string stem = fmt::format("h.{}.attn.q_proj", layer);
            lora.insert(stem + ".lora_A.weight", random_tensor({4, 12}, 60 + layer, DType::F32));
            lora.insert(stem + ".lora_B.weight", random_tensor({12, 4}, 70 + layer, DType::F32));
        }
        write_container(lora, adapter);

        write_recipe(nlohmann::json::object());
    }

    /// Writes recipe.json; entries in `overrides` replace the defaults.
    void write_recipe(const nlohmann::json& overrides) const {
        nlohmann::json doc = {{"base_path", "base.safetensors"},
                              {"aux_delta_path", "aux.safetensors"},
                              {"task_delta_path", "task.safetensors"},
                              {"output_path", "edited.safetensors"},
                              {"mode", "ethos"},
                              {"lambda", 0.6},
                              {"xi_fraction", 0.03}};
        if (!overrides.is_null())
            doc.update(overrides);
        std::ofstream(recipe) << doc.dump(2);
    }

    /// The shell command prefix for the CLI with a given thread cap.
    static std::string cli(unsigned threads) { return fmt::format("'{}' --threads {}", ORTHOEDIT_CLI, threads); }
};

} // namespace testing
