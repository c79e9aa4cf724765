#pragma once

#include "drpo/llm/gateway.hpp"
#include "drpo/llm/mock_backend.hpp"
#include "drpo/opt/context.hpp"
#include "drpo/opt/retrieval.hpp"
#include "drpo/opt/types.hpp"
#include "drpo/reward/rewarding.hpp"
#include "drpo/templates.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace drpo::testing {

inline std::filesystem::path data_dir()
{
  return DRPO_DATA_DIR;
}

inline std::filesystem::path template_dir()
{
  return DRPO_TEMPLATE_DIR;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("drpo-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline llm::BackendProfile mock_profile(llm::Role role, double temperature = 0.0)
{
  llm::BackendProfile p;
  p.role = role;
  p.temperature = temperature;
  return p;
}

// A gateway with one mock backend behind all three roles plus the objects an
// optimizer needs.
struct MockRig {
  std::shared_ptr<llm::MockBackend> mock = std::make_shared<llm::MockBackend>();
  llm::Gateway gateway;
  TemplateSet templates;
  reward::Rewarder rewarder;
  opt::Retriever retriever;
  opt::OptimizerContext context;

  explicit MockRig(reward::Mode mode = reward::Mode::dynamic, llm::GatewayOptions options = {},
                   int workers = 1)
      : gateway(options),
        rewarder(gateway, templates, mode),
        retriever(nullptr, &gateway.warnings()),
        context{gateway, templates, rewarder, retriever, workers}
  {
    gateway.bind(mock_profile(llm::Role::base), mock);
    gateway.bind(mock_profile(llm::Role::optimizer, 0.7), mock);
    gateway.bind(mock_profile(llm::Role::evaluator), mock);
  }
};

} // namespace drpo::testing
