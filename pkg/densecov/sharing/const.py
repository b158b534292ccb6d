# -*- coding: utf-8 -*-

class SharingMethod:
    ORIGINAL = 'original'
    PROPOSED = 'proposed'
    CENTRALIZED = 'centralized'

    ALL = (ORIGINAL, PROPOSED, CENTRALIZED)
