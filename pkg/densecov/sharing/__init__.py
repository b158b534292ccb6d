# -*- coding: utf-8 -*-

from typing import Callable, Dict, Tuple

from ..exceptions import ContractViolation
from ..sharing.const import SharingMethod
from ..sharing.ledger import \
    CoverageLedger, \
    new_ledger, \
    record_own_progress, \
    merge_proposed, \
    merge_original, \
    centralized_remaining, \
    omission_delta, \
    ledgers_agree, \
    ledger_snapshot, \
    write_ledger_snapshot, \
    remaining_from_progress

MERGES: Dict[str, Callable[[CoverageLedger, CoverageLedger], Tuple[CoverageLedger, CoverageLedger]]] = {
    SharingMethod.ORIGINAL: merge_original,
    SharingMethod.PROPOSED: merge_proposed,
}


def merge(method: str, ledger_r: CoverageLedger, ledger_s: CoverageLedger) -> Tuple[CoverageLedger, CoverageLedger]:
    """Merge two in-range ledgers with the pairwise rule of `method`.

    Centralized bookkeeping has a single shared ledger, so it has no pairwise rule.
    """
    if method not in MERGES:
        raise ContractViolation(f'Sharing method "{method}" has no pairwise merge rule')
    return MERGES[method](ledger_r, ledger_s)
