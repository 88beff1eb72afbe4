// SPDX-License-Identifier: Apache-2.0
//
// nomasim: uplink Monte-Carlo simulator for code-domain NOMA in Massive MIMO
// Copyright (C) 2026 The nomasim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "nomasim/core.hpp"

#include <vector>

namespace nomasim
{
    /// Pilot sequences (columns, length tau_p, squared norm tau_p) and the sequence
    /// each UE transmits. UEs are indexed cell-major.
    class PilotBook
    {
    public:
        PilotBook(CMatrix sequences, std::vector<int> assignment)
            : sequences_(std::move(sequences)), assignment_(std::move(assignment))
        {
            if (sequences_.rows() == 0 || sequences_.cols() == 0)
                throw DomainError("PilotBook: empty book");
            const double tau = static_cast<double>(sequences_.rows());
            for (Eigen::Index k = 0; k < sequences_.cols(); ++k)
                if (std::abs(sequences_.col(k).squaredNorm() - tau) > 1e-9 * tau)
                    throw DomainError("PilotBook: every pilot must satisfy ||phi||^2 = tau_p");
            for (int a : assignment_)
                if (a < 0 || a >= sequences_.cols())
                    throw DomainError("PilotBook: assignment refers to a missing sequence");
        }

        int tau_p() const { return static_cast<int>(sequences_.rows()); }
        int sequence_count() const { return static_cast<int>(sequences_.cols()); }
        int ue_count() const { return static_cast<int>(assignment_.size()); }
        int index_of(int flat_ue) const { return assignment_.at(static_cast<std::size_t>(flat_ue)); }
        auto pilot_of(int flat_ue) const { return sequences_.col(index_of(flat_ue)); }
        const CMatrix &matrix() const { return sequences_; }
        const std::vector<int> &assignment() const { return assignment_; }

        /// Distinct sequences are mutually orthogonal.
        bool is_orthogonal(double tol = 1e-9) const
        {
            const CMatrix gram = sequences_.adjoint() * sequences_;
            const double tau = static_cast<double>(tau_p());
            const CMatrix expected = tau * CMatrix::Identity(gram.rows(), gram.cols());
            return (gram - expected).cwiseAbs().maxCoeff() <= tol * tau;
        }

    private:
        CMatrix sequences_;
        std::vector<int> assignment_;
    };

    /// tau_p orthogonal pilots from the scaled DFT matrix; UE i of every cell uses
    /// pilot i (reuse factor 1).
    inline PilotBook shared_orthogonal_pilots(int cells, int ues_per_cell)
    {
        if (cells < 1 || ues_per_cell < 1)
            throw DomainError("shared_orthogonal_pilots: need at least one cell and one UE");
        const int tau = ues_per_cell;
        CMatrix F(tau, tau);
        for (int t = 0; t < tau; ++t)
            for (int k = 0; k < tau; ++k)
                F(t, k) = std::polar(1.0, -2.0 * std::numbers::pi * t * k / tau);
        std::vector<int> assignment;
        assignment.reserve(static_cast<std::size_t>(cells * ues_per_cell));
        for (int l = 0; l < cells; ++l)
            for (int i = 0; i < ues_per_cell; ++i)
                assignment.push_back(i);
        return PilotBook(std::move(F), std::move(assignment));
    }
} // namespace nomasim
