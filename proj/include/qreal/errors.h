// Copyright 2026 The qreal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QREAL_ERRORS_H
#define QREAL_ERRORS_H

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace qreal {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

#define QREAL_DEFINE_ERROR(Name) \
    class Name : public Error {  \
       public:                   \
        using Error::Error;      \
    }

QREAL_DEFINE_ERROR(CapacityExceeded);
QREAL_DEFINE_ERROR(NumericalFailure);
QREAL_DEFINE_ERROR(LayoutMismatch);
QREAL_DEFINE_ERROR(IndexError);
QREAL_DEFINE_ERROR(InvalidGenerator);
QREAL_DEFINE_ERROR(InvalidUnitary);
QREAL_DEFINE_ERROR(InvalidSchedule);
QREAL_DEFINE_ERROR(MissingReference);
QREAL_DEFINE_ERROR(UnsupportedRecord);
QREAL_DEFINE_ERROR(EpochMismatch);
QREAL_DEFINE_ERROR(InvalidProfile);
QREAL_DEFINE_ERROR(InvalidParameter);
QREAL_DEFINE_ERROR(ConfigError);
QREAL_DEFINE_ERROR(IntegrationDiverged);
QREAL_DEFINE_ERROR(MissingToken);

#undef QREAL_DEFINE_ERROR

/// A realized record was contradicted by the global amplitudes: the conditioned
/// view has (numerically) zero weight. Carries the epoch being evaluated when known.
class HistoryInconsistent : public Error {
   public:
    explicit HistoryInconsistent(const std::string &what, std::optional<size_t> epoch = std::nullopt)
        : Error(epoch ? what + " (epoch " + std::to_string(*epoch) + ")" : what), epoch_(epoch) {
    }
    std::optional<size_t> epoch() const {
        return epoch_;
    }

   private:
    std::optional<size_t> epoch_;
};

}  // namespace qreal

#endif
