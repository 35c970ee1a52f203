# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Compositional analysis of financial statements.

Firms are described by compositions of positive accounting figures
(revenues, costs, liabilities, assets, ...) and analysed through log-ratios:
geometric-mean industry centres, standard ratios derived from them, CoDa
biplots, k-means clustering and regression on firm characteristics.

"""
