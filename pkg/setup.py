#!/usr/bin/env python
# -*- coding: utf-8 -*-

from setuptools import setup, find_packages

with open('README.rst') as readme_file:
    readme = readme_file.read()

requirements = [
    'numpy>=1.17',
    'pandas>=1.0',
    'scipy>=1.5',
    'POT>=0.8',
    'attrs',
    'rich'
]

setup(
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Operating System :: POSIX :: Linux',
        'Programming Language :: Python :: 3 :: Only',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: Implementation :: CPython',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering'
    ],
    description='Density-driven optimal control for multi-agent non-uniform area coverage '
                'with optimal-transport weight bookkeeping.',
    entry_points={'console_scripts': [
        'densecov=densecov.main:main',
        'densecov-sim=densecov.main:main',
    ]},
    install_requires=requirements,
    keywords='multi-agent coverage optimal control optimal transport Wasserstein',
    license='Apache Software License 2.0',
    long_description=readme,
    name='densecov',
    package_data={'densecov': ['data/scenarios/*.json', ]},
    packages=find_packages(exclude=['test_*.py', 'tests']),
    python_requires='>=3.9',
    test_suite='tests',
    version='0.3.0',
    zip_safe=False,
)
