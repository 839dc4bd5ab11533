// Serial vs OpenMP timings of the hot loops. Arg 0 is the serial reference,
// arg 1 the parallel driver; both produce identical output.
#include <random>

#include <benchmark/benchmark.h>

#include "avam/agent.hpp"
#include "avam/env.hpp"
#include "avam/kernels.hpp"

namespace {

using namespace avam;

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::kSerial : Exec::kParallel;
}

const EnvConfig& config() {
  static const EnvConfig cfg;
  return cfg;
}

const SceneSpec& scene() {
  static const SceneSpec s = generate_scene(Task::kHiddenReach, 1, config());
  return s;
}

CameraPose camera() {
  return viewpoint_to_camera_pose(Viewpoint::make(1.2, deg2rad(35), deg2rad(150)),
                                  config().hemisphere_center);
}

void BM_Render(benchmark::State& state) {
  DepthImage img;
  for (auto _ : state) {
    kernels::render(scene(), camera(), config().image, img, exec_of(state));
    benchmark::DoNotOptimize(img.depth.data());
  }
}
BENCHMARK(BM_Render)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Visibility(benchmark::State& state) {
  const CameraPose cam = camera();
  const PointCloud pc = depth_to_pointcloud(render_depth(scene(), cam, config().image), cam,
                                            config().image);
  const VoxelGrid grid = voxelize(pc, config().scene_grid);
  std::vector<Visibility> labels(grid.size());
  for (auto _ : state) {
    kernels::visibility(grid, cam.position, labels, exec_of(state));
    benchmark::DoNotOptimize(labels.data());
  }
}
BENCHMARK(BM_Visibility)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SolidOccupancy(benchmark::State& state) {
  const AzimuthRotation rot(deg2rad(60));
  VoxelGrid grid(config().roi_grid(scene().goal));
  for (auto _ : state) {
    kernels::solid_occupancy(scene(), rot, grid, exec_of(state));
    benchmark::DoNotOptimize(grid.occupied.data());
  }
}
BENCHMARK(BM_SolidOccupancy)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_ExternalOcclusion(benchmark::State& state) {
  const AzimuthRotation rot(deg2rad(60));
  VoxelGrid grid(config().roi_grid(scene().goal));
  kernels::solid_occupancy(scene(), rot, grid, Exec::kSerial);
  std::vector<std::uint8_t> blocked(grid.size());
  for (auto _ : state) {
    kernels::external_occlusion(scene(), rot, grid, camera().position, blocked, exec_of(state));
    benchmark::DoNotOptimize(blocked.data());
  }
}
BENCHMARK(BM_ExternalOcclusion)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

// Full-size NBV network, batch 32; second arg is the chunk size.
void BM_Gradient(benchmark::State& state) {
  QNetwork net = DualAgent::make(config(), {128, 128}, 0).nbv;
  net.init(1, 1.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int b = 32;
  QRegressionBatch batch{Eigen::MatrixXd(net.input_size(), b), Eigen::MatrixXi(2, b),
                         Eigen::VectorXd(b)};
  for (Eigen::Index i = 0; i < batch.inputs.size(); ++i) batch.inputs.data()[i] = u(rng);
  for (int i = 0; i < b; ++i) {
    batch.actions(0, i) = static_cast<int>(rng() % net.heads()[0]);
    batch.actions(1, i) = static_cast<int>(rng() % net.heads()[1]);
    batch.targets[i] = u(rng);
  }
  Gradients g = Gradients::zeros_like(net);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        q_regression_gradient(net, batch, g, exec_of(state), static_cast<int>(state.range(1))));
  }
}
BENCHMARK(BM_Gradient)
    ->ArgsProduct({{0, 1}, {4, 8, 32}})
    ->Unit(benchmark::kMillisecond);

void BM_GradientReference(benchmark::State& state) {
  QNetwork net = DualAgent::make(config(), {128, 128}, 0).nbv;
  net.init(1, 1.0);
  const int b = 32;
  QRegressionBatch batch{Eigen::MatrixXd::Constant(net.input_size(), b, 0.5),
                         Eigen::MatrixXi::Zero(2, b), Eigen::VectorXd::Constant(b, 0.3)};
  Gradients g = Gradients::zeros_like(net);
  for (auto _ : state) {
    benchmark::DoNotOptimize(q_regression_gradient_reference(net, batch, g));
  }
}
BENCHMARK(BM_GradientReference)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
