// moa-lab: sweeps and reports for multi-operand adder architectures.
//
//   moa-lab mred-sweep   --bits 4,8,12 --ratios 0,0.25,0.5 [--exhaustive | --samples N --seed S]
//   moa-lab serial-cost  --clusters 2,4,6,8 [--bits 8]
//   moa-lab layer-report --weights conv1.txt [--per-filter] [--arch serial --clusters 6]
//   moa-lab layer-report --synthetic dense --shape 96,3,11,11
//   moa-lab tree-build   --n 1774 --bits 8 [--ratios 0.5 | --levels 2,2,1]
//   moa-lab scm          --constant 7,-6,0
//
// All commands accept --cost-model <file> (key = value) and --out <file>.
// MOA_LAB_THREADS caps the worker count. Exit codes: 0 success, 1 bad input,
// 2 I/O failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "moa_lab/moa_lab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitIo = 2;

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    if (!std::cout) throw moa_lab::IoError("failed writing to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw moa_lab::IoError("cannot open output file '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw moa_lab::IoError("failed writing output file '" + path + "'");
}

moa_lab::ApproxPolicy policy_from(const std::vector<double>& ratios, const std::vector<unsigned>& levels) {
  if (!levels.empty() && !ratios.empty()) {
    throw moa_lab::InputDomainError("--ratios and --levels are mutually exclusive");
  }
  if (!levels.empty()) return moa_lab::PerLevel{levels};
  if (ratios.size() > 1) throw moa_lab::InputDomainError("this command takes a single --ratios value");
  if (ratios.empty() || ratios.front() == 0.0) return moa_lab::ExactAll{};
  return moa_lab::UniformRatio{ratios.front()};
}

std::vector<std::size_t> parse_shape(const std::vector<std::size_t>& dims) {
  if (dims.size() != 4) throw moa_lab::InputDomainError("--shape expects N,C,J,K");
  for (std::size_t d : dims) {
    if (d == 0) throw moa_lab::InputDomainError("--shape dimensions must be positive");
  }
  return dims;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-operand adder simulator and FPGA cost model"};
  app.require_subcommand(1);

  std::vector<unsigned> bits;
  std::vector<double> ratios;
  std::vector<std::size_t> clusters;
  std::uint64_t seed = 1;
  std::uint64_t samples = 0;
  bool exhaustive = false;
  std::string cost_model_path;
  std::string out_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--cost-model", cost_model_path, "Cost model file (key = value)");
    cmd->add_option("--out", out_path, "Output file (default: stdout)");
  };

  auto* mred_cmd = app.add_subcommand("mred-sweep", "MRED and ALM cost of LOA adders over bit-widths and ratios");
  mred_cmd->add_option("--bits", bits, "Adder bit-widths")->delimiter(',');
  mred_cmd->add_option("--ratios", ratios, "Approximation ratios l/b in [0,1]")->delimiter(',');
  mred_cmd->add_option("--seed", seed, "Monte-Carlo seed");
  auto* samples_opt = mred_cmd->add_option("--samples", samples, "Monte-Carlo sample count per cell");
  auto* exhaustive_opt = mred_cmd->add_flag("--exhaustive", exhaustive, "Enumerate all operand pairs (b <= 12)");
  samples_opt->excludes(exhaustive_opt);
  add_common(mred_cmd);

  auto* serial_cmd = app.add_subcommand("serial-cost", "Serializer/accumulator cost against an adder tree");
  serial_cmd->add_option("--clusters", clusters, "Cluster sizes n_c")->delimiter(',');
  serial_cmd->add_option("--bits", bits, "Operand width (single value, default 8)")->delimiter(',');
  add_common(serial_cmd);

  std::string weights_path;
  std::string synthetic;
  std::vector<std::size_t> shape_dims;
  std::size_t out_h = 1, out_w = 1;
  std::string arch = "tree";
  unsigned activation_bits = 8;
  bool per_filter = false;
  std::string layer_name = "layer";
  auto* layer_cmd = app.add_subcommand("layer-report", "Direct-hardware-mapping report for one convolution layer");
  auto* weights_opt = layer_cmd->add_option("--weights", weights_path, "Weight file: 'N C J K' then N*C*J*K integers");
  auto* synthetic_opt = layer_cmd->add_option("--synthetic", synthetic, "Generate weights instead: dense | half")
                            ->check(CLI::IsMember({"dense", "half"}));
  weights_opt->excludes(synthetic_opt);
  layer_cmd->add_option("--shape", shape_dims, "Layer shape N,C,J,K")->delimiter(',');
  layer_cmd->add_option("--out-h", out_h, "Output height V");
  layer_cmd->add_option("--out-w", out_w, "Output width U");
  layer_cmd->add_option("--ratios", ratios, "Approximation ratio for MOA adders (single value)")->delimiter(',');
  layer_cmd->add_option("--arch", arch, "MOA architecture")->check(CLI::IsMember({"tree", "serial"}));
  layer_cmd->add_option("--clusters", clusters, "Cluster size for --arch serial (single value)")->delimiter(',');
  layer_cmd->add_option("--activation-bits", activation_bits, "Signed activation width");
  layer_cmd->add_option("--seed", seed, "Seed for --synthetic");
  layer_cmd->add_option("--name", layer_name, "Layer label in the summary row");
  layer_cmd->add_flag("--per-filter", per_filter, "One row per filter instead of a summary");
  add_common(layer_cmd);

  std::size_t tree_n = 0;
  std::vector<unsigned> levels;
  auto* tree_cmd = app.add_subcommand("tree-build", "Adder tree statistics for n operands");
  tree_cmd->add_option("--n", tree_n, "Operand count")->required();
  tree_cmd->add_option("--bits", bits, "Operand width (single value, default 8)")->delimiter(',');
  tree_cmd->add_option("--ratios", ratios, "Uniform approximation ratio (single value)")->delimiter(',');
  tree_cmd->add_option("--levels", levels, "Approximate bits per level, level 1 first")->delimiter(',');
  add_common(tree_cmd);

  std::vector<std::int64_t> constants;
  auto* scm_cmd = app.add_subcommand("scm", "Canonical signed-digit recoding of constants");
  scm_cmd->add_option("--constant", constants, "Constant(s) to recode")->delimiter(',')->required();
  add_common(scm_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    const unsigned threads = moa_lab::default_thread_count();
    moa_lab::CostModel model;
    if (!cost_model_path.empty()) model = moa_lab::load_cost_model(cost_model_path);
    auto single_width = [&]() -> unsigned {
      if (bits.size() > 1) throw moa_lab::InputDomainError("--bits takes a single value for this command");
      return bits.empty() ? 8u : bits.front();
    };
    std::ostringstream out;

    if (*mred_cmd) {
      moa_lab::SweepSpec spec;
      if (!bits.empty()) spec.bitwidths = bits;
      if (!ratios.empty()) spec.ratios = ratios;
      spec.seed = seed;
      if (*samples_opt) spec.samples = samples;
      spec.exhaustive = exhaustive;
      spec.model = model;
      moa_lab::cmd_mred_sweep(spec, out, threads);
    } else if (*serial_cmd) {
      moa_lab::SweepSpec spec;
      if (!clusters.empty()) spec.cluster_sizes = clusters;
      spec.operand_width = single_width();
      spec.model = model;
      moa_lab::cmd_serial_cost(spec, out);
    } else if (*layer_cmd) {
      if (weights_path.empty() && synthetic.empty()) {
        throw moa_lab::InputDomainError("layer-report needs --weights <file> or --synthetic dense|half");
      }
      std::optional<moa_lab::WeightTensor> weights;
      if (!weights_path.empty()) {
        weights = moa_lab::load_weights(weights_path);
        if (!shape_dims.empty()) {
          const auto d = parse_shape(shape_dims);
          if (d[0] != weights->n_filters() || d[1] != weights->channels() || d[2] != weights->kernel_h() ||
              d[3] != weights->kernel_w()) {
            throw moa_lab::InputDomainError("--shape disagrees with the weight file header");
          }
        }
      } else {
        if (shape_dims.empty()) throw moa_lab::InputDomainError("--synthetic requires --shape N,C,J,K");
        const auto d = parse_shape(shape_dims);
        const auto kind = synthetic == "dense" ? moa_lab::SyntheticSparsity::Dense : moa_lab::SyntheticSparsity::HalfZero;
        weights = moa_lab::synthetic_weights({d[0], d[1], d[2], d[3], 1, 1}, kind, seed);
      }
      moa_lab::LayerReportOptions options;
      options.map.policy = policy_from(ratios, {});
      options.map.activation_bits = activation_bits;
      options.map.model = model;
      if (arch == "serial") {
        if (clusters.size() > 1) throw moa_lab::InputDomainError("--clusters takes a single value for layer-report");
        options.map.arch = moa_lab::SerialArch{clusters.empty() ? std::size_t{6} : clusters.front()};
      }
      options.per_filter = per_filter;
      options.layer_name = layer_name;
      moa_lab::cmd_layer_report(*weights, weights->shape(out_h, out_w), options, out, threads);
    } else if (*tree_cmd) {
      moa_lab::cmd_tree_build(tree_n, single_width(), policy_from(ratios, levels), model, out);
    } else if (*scm_cmd) {
      moa_lab::cmd_scm(constants, out);
    }

    emit(out.str(), out_path);
    return kExitOk;
  } catch (const moa_lab::IoError& e) {
    std::cerr << "moa-lab: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "moa-lab: " << e.what() << '\n';
    return kExitInput;
  }
}
