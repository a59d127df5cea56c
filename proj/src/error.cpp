#include "duo/error.hpp"

namespace duo {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateType: return "DuplicateType";
    case ErrorKind::UnknownType: return "UnknownType";
    case ErrorKind::DependentFiducials: return "DependentFiducials";
    case ErrorKind::UnphysicalFiducial: return "UnphysicalFiducial";
    case ErrorKind::SingularMetric: return "SingularMetric";
    case ErrorKind::SingularTransform: return "SingularTransform";
    case ErrorKind::NoSuchPort: return "NoSuchPort";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::ColorClash: return "ColorClash";
    case ErrorKind::DirectionMismatch: return "DirectionMismatch";
    case ErrorKind::DuplicatePort: return "DuplicatePort";
    case ErrorKind::IndexMismatch: return "IndexMismatch";
    case ErrorKind::MissingMetric: return "MissingMetric";
    case ErrorKind::CycleCreated: return "CycleCreated";
    case ErrorKind::PortTaken: return "PortTaken";
    case ErrorKind::PortNotOpen: return "PortNotOpen";
    case ErrorKind::InvalidCircuit: return "InvalidCircuit";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::UnphysicalZ: return "UnphysicalZ";
    case ErrorKind::TraceIncreasing: return "TraceIncreasing";
    case ErrorKind::MissingOperation: return "MissingOperation";
    case ErrorKind::OracleTooLarge: return "OracleTooLarge";
    case ErrorKind::ValidationFailed: return "ValidationFailed";
    case ErrorKind::NotSameExperiment: return "NotSameExperiment";
    case ErrorKind::IncompatibleFoliation: return "IncompatibleFoliation";
    case ErrorKind::LexError: return "LexError";
    case ErrorKind::DuplicateProducer: return "DuplicateProducer";
    case ErrorKind::TripleUse: return "TripleUse";
    case ErrorKind::TypeClash: return "TypeClash";
    case ErrorKind::CycleError: return "CycleError";
    case ErrorKind::FormatError: return "FormatError";
  }
  return "Unknown";
}

}  // namespace duo
