#pragma once

#include "drpo/llm/gateway.hpp"
#include "drpo/opt/retrieval.hpp"
#include "drpo/reward/rewarding.hpp"
#include "drpo/templates.hpp"

namespace drpo::opt {

// Everything an optimization loop needs from the surrounding run.
struct OptimizerContext {
  llm::Gateway& gateway;
  const TemplateSet& templates;
  reward::Rewarder& rewarder;
  const Retriever& retriever;
  int workers = 1;
};

} // namespace drpo::opt
