from setuptools import setup, find_packages

setup(
    name="bell-link",
    version=1.0,
    packages=find_packages(exclude=["examples", "examples.*"]),
    package_data={"bell_link": ["configs/run/*.yaml", "configs/run/*.conf", "configs/strategies/*.yaml"]},
    install_requires=[
        "pydantic>=2",
        "numpy",
        "scipy",
        "attrs",
        "omegaconf",
        "pyyaml",
        "tqdm",
        "python-dotenv",
    ],
    entry_points={"console_scripts": ["bell-link=bell_link.cli:main"]},
)
