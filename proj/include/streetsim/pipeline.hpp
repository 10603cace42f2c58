#pragma once

#include <filesystem>
#include <functional>

#include "streetsim/config.hpp"

namespace streetsim {

struct GenerateStats {
  long frames = 0;
  double seconds = 0.0;  // wall-clock
  std::filesystem::path out_dir;
};

/// Called with (frames written, total) as generation proceeds; always invoked
/// from the calling thread.
using ProgressFn = std::function<void(long, long)>;

/// Runs a full generation session: builds the scene, drives traffic, samples
/// the environment per frame, annotates, and writes the dataset tree
/// (including the manifest) under config.exporter.out_dir.
///
/// `jobs` sizes the worker pool for capture/annotation/serialization; the
/// simulation itself is always sequential, and the dataset bytes are
/// identical for every jobs value. jobs <= 0 means one worker per available
/// core. The first error from any worker is rethrown here.
GenerateStats run_generate(const RunConfig& config, int jobs = 1,
                           const ProgressFn& progress = {});

}  // namespace streetsim
