#include "drpo/opt/inference.hpp"

namespace drpo::opt {

llm::Messages assemble_messages(const std::string& system_prompt,
                                const std::vector<ICLExample>& examples, const std::string& query)
{
  llm::Messages messages{{llm::Speaker::system, system_prompt}};
  for (const auto& e : examples) {
    messages.push_back({llm::Speaker::user, e.query});
    messages.push_back({llm::Speaker::assistant, e.response});
  }
  messages.push_back({llm::Speaker::user, query});
  return messages;
}

llm::Messages assemble_inference_prompt(const AlignmentArtifact& artifact, const std::string& query,
                                        const Retriever& retriever)
{
  return assemble_messages(artifact.system_prompt,
                           retriever.retrieve_examples(query, artifact.icl_examples, artifact.k), query);
}

} // namespace drpo::opt
