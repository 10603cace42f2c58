#include "streetsim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <vector>

namespace streetsim {

namespace {

std::unordered_map<int32_t, ActorKind> kinds_of(const std::vector<Actor>& actors) {
  std::unordered_map<int32_t, ActorKind> kinds;
  kinds.reserve(actors.size());
  for (const Actor& a : actors) kinds.emplace(a.id, a.kind);
  return kinds;
}

/// One frame's worth of captured simulation state, handed to a worker. The
/// actor list is a value copy so the session thread can keep stepping.
struct FrameJob {
  long index = 0;
  double time_s = 0.0;
  std::vector<Actor> actors;
  EnvironmentState env;
};

/// Bounded handoff queue: the session thread blocks once `capacity` frames
/// are waiting, keeping memory flat ahead of slow workers.
class JobQueue {
 public:
  explicit JobQueue(size_t capacity) : capacity_(capacity) {}

  void push(FrameJob&& job) {
    std::unique_lock<std::mutex> lock(mu_);
    can_push_.wait(lock, [this] { return jobs_.size() < capacity_ || failed_; });
    if (failed_) return;  // producer checks take_error() right after
    jobs_.push_back(std::move(job));
    can_pop_.notify_one();
  }

  bool pop(FrameJob& out) {
    std::unique_lock<std::mutex> lock(mu_);
    can_pop_.wait(lock, [this] { return !jobs_.empty() || closed_ || failed_; });
    if (failed_ || jobs_.empty()) return false;
    out = std::move(jobs_.front());
    jobs_.pop_front();
    can_push_.notify_one();
    return true;
  }

  void close() {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
    can_pop_.notify_all();
  }

  void fail(std::exception_ptr error) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!error_) error_ = std::move(error);
    failed_ = true;
    can_pop_.notify_all();
    can_push_.notify_all();
  }

  bool has_failed() {
    std::lock_guard<std::mutex> lock(mu_);
    return failed_;
  }

  std::exception_ptr take_error() {
    std::lock_guard<std::mutex> lock(mu_);
    return error_;
  }

 private:
  size_t capacity_;
  std::mutex mu_;
  std::condition_variable can_push_;
  std::condition_variable can_pop_;
  std::deque<FrameJob> jobs_;
  bool closed_ = false;
  bool failed_ = false;
  std::exception_ptr error_;
};

}  // namespace

GenerateStats run_generate(const RunConfig& config, int jobs, const ProgressFn& progress) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const IntersectionMap map = build_intersection(config.scene);
  const ActorCatalog catalog = make_catalog(config.traffic);
  const std::vector<Route> vehicle_routes = build_vehicle_routes(map);
  const CameraModel cam = make_camera(config.camera);
  const TrafficParams traffic = make_traffic_params(config.traffic);
  const AnnotateConfig annotate = make_annotate_config(config);
  const CaptureSchedule schedule = make_capture_schedule(config.capture);
  EnvironmentSchedule env_schedule = config.environment;

  WorldState world = make_world(Rng::derive_seed(config.seed, 0), traffic);
  Rng env_rng(Rng::derive_seed(config.seed, 1));

  const DatasetLayout layout{config.exporter.out_dir};
  DatasetWriter writer(layout, config.exporter, config_json(config), config.seed,
                       schedule.total_frames);

  if (jobs <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    jobs = hw > 0 ? static_cast<int>(hw) : 1;
  }

  std::atomic<long> frames_done{0};
  const auto report = [&](long done) {
    if (progress) progress(done, schedule.total_frames);
  };

  if (jobs == 1) {
    run_capture_session(world, map, vehicle_routes, catalog, cam, traffic, schedule,
                        env_schedule, env_rng, annotate, [&](CaptureResult&& res) {
                          writer.write_frame(res, kinds_of(world.actors));
                          report(frames_done.fetch_add(1) + 1);
                        });
  } else {
    JobQueue queue(static_cast<size_t>(2 * jobs));
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(jobs));
    for (int i = 0; i < jobs; ++i) {
      workers.emplace_back([&] {
        FrameJob job;
        while (queue.pop(job)) {
          try {
            CaptureResult res = capture_actors(job.actors, map, catalog, cam, job.env, annotate);
            res.frame.frame_index = job.index;
            res.frame.capture_time_s = job.time_s;
            writer.write_frame(res, kinds_of(job.actors));
            frames_done.fetch_add(1);
          } catch (...) {
            queue.fail(std::current_exception());
            return;
          }
        }
      });
    }

    // Same stepping contract as run_capture_session; only the capture work
    // moves off-thread. Environment draws stay here, in frame order.
    try {
      spawn_despawn(world, map, vehicle_routes, catalog, traffic);
      for (long k = 0; k < schedule.total_frames && !queue.has_failed(); ++k) {
        const double target = static_cast<double>(k) * schedule.period_s;
        while (world.t + 1e-9 < target) {
          step(world, map, catalog, traffic, std::min(traffic.dt, target - world.t));
          spawn_despawn(world, map, vehicle_routes, catalog, traffic);
        }
        world.t = target;
        world.lights = light_phase(target, traffic.cycle);

        FrameJob job;
        job.index = k;
        job.time_s = target;
        job.env = next_environment(env_rng, env_schedule);
        job.actors = world.actors;
        queue.push(std::move(job));
        report(frames_done.load());
      }
    } catch (...) {
      queue.fail(std::current_exception());
    }

    queue.close();
    for (std::thread& t : workers) t.join();
    if (std::exception_ptr error = queue.take_error()) std::rethrow_exception(error);
  }

  writer.finalize();
  report(frames_done.load());

  GenerateStats stats;
  stats.frames = frames_done.load();
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  stats.out_dir = layout.root;
  return stats;
}

}  // namespace streetsim
