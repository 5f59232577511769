from setuptools import setup, find_packages
from os.path import join, dirname


def read(fname):
    return open(join(dirname(__file__), fname)).read()


with open(join(dirname(__file__), 'heentangle/_version.py')) as versionpy:
    exec(versionpy.read())

with open('requirements.txt') as reqsfile:
    required = reqsfile.read().splitlines()

setup(
    name='heentangle',
    version=__version__,
    description=("Resonances and spatial entanglement of two-electron "
                 "atoms."),
    long_description=read('README.md'),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['experiments']),
    install_requires=required,
    extras_require={'test': ['pytest>=5.0']},
    entry_points={'console_scripts': ['heentangle = heentangle.cli:main']},
    license='MIT',
    classifiers=['Topic :: Scientific/Engineering :: Physics',
                 'Topic :: Scientific/Engineering :: Chemistry',
                 'License :: OSI Approved :: MIT License',
                 'Development Status :: 3 - Alpha',
                 'Operating System :: POSIX :: Linux',
                 'Programming Language :: Python :: 3.7',
                 'Programming Language :: Python :: 3.8',
                 'Programming Language :: Python :: 3.9']
)
