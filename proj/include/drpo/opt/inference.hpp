#pragma once

#include "drpo/llm/types.hpp"
#include "drpo/opt/retrieval.hpp"
#include "drpo/opt/types.hpp"

#include <string>
#include <vector>

namespace drpo::opt {

// Canonical prompt layout used both while optimizing and when serving:
// system prompt, then each example as a user/assistant turn pair in the given
// order, then the query as the final user turn.
llm::Messages assemble_messages(const std::string& system_prompt,
                                const std::vector<ICLExample>& examples, const std::string& query);

// Retrieves artifact.k examples for `query` and assembles the messages.
llm::Messages assemble_inference_prompt(const AlignmentArtifact& artifact, const std::string& query,
                                        const Retriever& retriever);

} // namespace drpo::opt
