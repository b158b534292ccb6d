# -*- coding: utf-8 -*-

__version__ = '0.3.0'
program_name = 'densecov'
program_summary = f'densecov version {__version__}: Density-driven optimal control for multi-agent ' \
                  f'non-uniform area coverage. '
program_desc = (f'{program_summary}\n\n'
                f'Built-in scenarios:\n\n'
                f'* integrator-coverage:  6 single integrators over a 100 m x 100 m mixture map\n'
                f'* quadrotor-coverage:   6 linearised planar quadrotors with r_comm = 25 m\n'
                f'* quadrotor-sharing:    20 quadrotors run until their ledgers are exhausted\n'
                f'* energy-flexibility:   2 integrators with unequal operation times\n\n'
                'Agents follow a finite-horizon optimal controller toward locally selected sample-points, '
                'transport weight from the reference point cloud and share coverage progress with '
                'peers inside their communication range.')
