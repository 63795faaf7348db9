#pragma once

#include <vector>

#include "koopqg/config.hpp"

namespace kqg::pipeline {

/// Base-trajectory protocol: integrate rest + seeded smooth noise for
/// base_time, then collect pod_snapshots states every pod_stride. Writes the
/// base state and the snapshot container under io.output_dir/spinup.
void cmd_spinup(const RunConfig& cfg);

/// POD of the spinup snapshots, member generation, spin-up, and recording of
/// the training and test ensembles to disk.
void cmd_ensemble(const RunConfig& cfg);

/// Generator spectrum CSV for the configured kernel (+ V and psi0
/// containers). `average_times` optionally averages |omega| over spectra
/// re-anchored at those output times (experimental).
void cmd_koopman(const RunConfig& cfg,
                 const std::vector<double>& average_times = {});

void cmd_lyapunov(const RunConfig& cfg);
void cmd_reconstruct(const RunConfig& cfg);
void cmd_assimilate(const RunConfig& cfg);

/// Seeded smooth low-mode perturbation used by the base-trajectory protocol.
Field2D base_noise_field(const qg::ModelParams& params, double amplitude,
                         std::uint64_t seed);

}  // namespace kqg::pipeline
