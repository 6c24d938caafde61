#include "kvet/errors.hpp"

namespace kvet {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::MalformedFeed: return "MalformedFeed";
    case Errc::UnparsableVersion: return "UnparsableVersion";
    case Errc::CveMismatch: return "CveMismatch";
    case Errc::NotFound: return "NotFound";
    case Errc::IoFailure: return "IoFailure";
    case Errc::MalformedHunkHeader: return "MalformedHunkHeader";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::NotAppliable: return "NotAppliable";
    case Errc::NoVersionsInRange: return "NoVersionsInRange";
    case Errc::ProviderFailure: return "ProviderFailure";
    case Errc::MissingRoot: return "MissingRoot";
    case Errc::SourceCycle: return "SourceCycle";
    case Errc::NoPatch: return "NoPatch";
    case Errc::ConflictingType: return "ConflictingType";
    case Errc::BadArgument: return "BadArgument";
    }
    return "Error";
}

} // namespace kvet
