#include "focal/errors.hpp"

#include <utility>

namespace focal {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column,
                       std::string path)
    : Error(message), line_(line), column_(column), path_(std::move(path)) {}

LayoutError::LayoutError(const std::string& message, std::string scene_id)
    : Error(message), scene_id_(std::move(scene_id)) {}

AlignmentError::AlignmentError(const std::string& message,
                               std::vector<std::string> missing_in_pred,
                               std::vector<std::string> missing_in_gold)
    : Error(message),
      missing_in_pred_(std::move(missing_in_pred)),
      missing_in_gold_(std::move(missing_in_gold)) {}

}  // namespace focal
