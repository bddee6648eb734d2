"""Regenerate src/graphchat/data/benchmark_v1.json from inline definitions."""

import json
from pathlib import Path

K = []


def kq(n, sub, stem, a, b, c, d, correct):
    K.append(
        {
            "qid": f"k{n:02d}",
            "category": "knowledge",
            "subcategory": sub,
            "stem": stem,
            "options": {"A": a, "B": b, "C": c, "D": d},
            "correct": correct,
        }
    )


def cq(n, sub, stem, a, b, c, d, correct):
    K.append(
        {
            "qid": f"c{n:02d}",
            "category": "code",
            "subcategory": sub,
            "stem": stem,
            "options": {"A": a, "B": b, "C": c, "D": d},
            "correct": correct,
        }
    )


kq(1, "beginner", "What is an echo state network?",
   "A place where anything is kept in store.",
   "A recurrent neural network in which usually only the output neurons are trained.",
   "A black box component that receives an input signal to be read out and mapped by another process.",
   "A large natural or artificial lake used as a source of water supply.",
   "B")

kq(2, "beginner", "What is Reservoir Computing?",
   "A machine learning paradigm for timeseries.",
   "The construction of a computer model of a petroleum reservoir.",
   "A branch of fluid dynamics that studies the design of tank trucks to reduce rollover accidents.",
   "It is only a computational framework in which all the computations are done by a pool of water.",
   None)

kq(3, "beginner", "What is call the readout? (in the context of Reservoir Computing)",
   "A linear regression that models the Markovian process of a support vector machine.",
   "An efficient way for input processing in order to read only part of the inputs.",
   "A black box component that receives an input signal to be read out and mapped back to the input for predictive coding.",
   "A trainable layer that extracts the dynamics of a reservoir to produce some desired outputs.",
   "D")

kq(4, "beginner", "On which task is Reservoir Computing known to compete with the state-of-the-art?",
   "Video segmentation.",
   "Natural language processing.",
   "Image recognition.",
   "Chaotic timeseries prediction.",
   "D")

kq(5, "beginner", "On which task is it challenging to apply Reservoir Computing compared to other state-of-the-art methods?",
   "A task with small univariate dataset.",
   "Video segmentation.",
   "Chaotic timeseries prediction.",
   "Classification of timeseries with few classes.",
   "B")

kq(6, "beginner", "Approximately how many neurons are used inside an echo state network?",
   "Around 1 thousand neurons.",
   "Around 100 thousand neurons.",
   "Around 10 neurons.",
   "Around 1 million neurons.",
   "A")

kq(7, "beginner", "What is the purpose of using ridge regression instead of linear regression for the readout?",
   "Reduce the computational cost.",
   "Improve numerical stability.",
   "Improve explainability of the model.",
   "Avoid the exploding/vanishing gradient problem.",
   "B")

kq(8, "beginner", "How are the weights most often initialized in an echo state network?",
   "They can be randomly initialized and then scaled to have a specific spectral radius.",
   "They are tuned according to an autocorrelation Hebbian learning rule.",
   "Trained using a linear regression.",
   "Each neuron is connected to only one input.",
   "A")

kq(9, "intermediate", "What is the difference between ‘echo state network’ and ‘Reservoir Computing’?",
   "Reservoir Computing is a type of recurrent neural network model based on the philosophy of the echo state network.",
   "There is no difference, we can use the terms Reservoir Computing and echo state network indistinctly.",
   "An echo state network is a type of recurrent neural network model based on the Reservoir Computing paradigm.",
   "In Reservoir Computing, the reservoir part is a physical system, in echo state networks, the reservoir part is a recurrent neural network.",
   "C")

kq(10, "intermediate", "Are there other forms of Reservoir Computing than echo state networks?",
   "No, an echo state network is not even a form of Reservoir Computing.",
   "Yes, any random kernel method, even those who don't apply to timeseries, are considered to be a form of Reservoir Computing.",
   "No, Reservoir Computing only refers to the philosophy behind echo state networks.",
   "Yes, there are for instance physical reservoirs or liquid state machines, in which the reservoir is a spiking neural network.",
   "D")

kq(11, "intermediate", "What is a liquid state machine?",
   "An architecture in which the reservoir part is a pool of spiking neurons.",
   "A physical reservoir in which the reservoir is a reservoir of liquid, usually water.",
   "Liquid state machine and Reservoir Computing designate the same concept.",
   "A computational model of the hippocampus using the Reservoir Computing paradigm.",
   "A")

kq(12, "intermediate", "Why is it called ‘computing at the edge of chaos’?",
   "Because it is common to add noise (and thus chaos) to the reservoir in order to stabilize its activity.",
   "Because Reservoir Computing works best for chaotic timeseries forecasting.",
   "Because Reservoir Computing often works best when the dynamics of the reservoir are approaching chaotic dynamics, but are not chaotic.",
   "It requires computers to be physically placed at the edge of a chaotic environment, such as a volcano or a kindergarten.",
   "C")

kq(13, "intermediate", "What is the ‘echo state property’?",
   "The echo state property allows the reservoir to operate with chaotic behavior to enhance computational power.",
   "The ability to memorize past activity and cycle over it (the echo).",
   "The ability to perfectly reconstruct any input signal from the reservoir activity.",
   "The influence of initial states on the reservoir dynamics decays over time, ensuring that the current state primarily reflects recent inputs.",
   "D")

kq(14, "intermediate", "What are some of the most important hyper-parameters?",
   "The spectral radius of the recurrent weight matrix, the leak rate, the input scaling.",
   "The spectral radius of the recurrent weight matrix, the reservoir connectivity, the weight distribution.",
   "The spectral radius of the recurrent weight matrix, the reservoir connectivity, the encoding of the input.",
   "The activation function, the reservoir connectivity, the regularization parameter.",
   "A")

kq(15, "advanced", "How explainable are Reservoir Computing models?",
   "Reservoir Computing models are generally less explainable due to their reliance on complex, nonlinear dynamics within the reservoir, making it difficult to trace the exact path of information processing.",
   "Reservoir Computing models are fully explainable because they rely on predefined, static patterns that do not change over time.",
   "Reservoir Computing models are highly explainable because they use simple linear transformations that can be easily interpreted.",
   "Reservoir Computing models are completely explainable due to their deterministic nature, which allows for perfect traceability of every computation.",
   "A")

kq(16, "advanced", "To what extent do the results vary between two differently initialized reservoirs?",
   "The results between two differently initialized reservoirs are completely unpredictable and random, regardless of the input data.",
   "The results between two differently initialized reservoirs are always identical because the initialization has no impact on the reservoir's dynamics.",
   "The results between two differently initialized reservoirs can vary somewhat, but the overall performance and behavior of the reservoir are generally robust to different initialisations, provided the reservoir is sufficiently large and well-designed.",
   "The results between two differently initialized reservoirs vary significantly because the initialization determines the exact sequence of outputs.",
   "C")

kq(17, "expert", "What is the effective spectral radius?",
   "The real spectral radius of the matrix W, that is always a bit different from the specified spectral radius.",
   "A weighted sum of all eigenvalues norms, that takes into account the distribution of the spectrum.",
   "A value that has similar properties to the spectral radius of a matrix, taking into account the full reservoir equation.",
   "The norm of the singular values for each neuron. It is a way to evaluate the impact of each neuron on the reservoir.",
   "C")

kq(18, "expert", "What is a deep reservoir?",
   "A deep reservoir is a Reservoir Computing architecture that consists of multiple layers of interconnected reservoirs, allowing for hierarchical processing and the capture of more complex temporal dynamics.",
   "An underground gas or petroleum reservoir that cannot be reached using traditional tools and infrastructure.",
   "A deep reservoir is a reservoir that employs deep learning techniques, such as backpropagation, to train the weights within the reservoir, enhancing its ability to learn from data.",
   "A deep reservoir is a reservoir that uses extremely large and dense weight matrices to store vast amounts of data.",
   "A")

kq(19, "expert", "What is the use of an orthogonal matrix in the reservoir equation?",
   "An orthogonal matrix can be represented in a condensed form, improving matrix multiplication computation time.",
   "An orthogonal matrix in the reservoir equation is used to prevent any interaction between neurons, maintaining independence.",
   "This is a trick question, there is no point in using an orthogonal matrix.",
   "It augments the memory capacity of the reservoir.",
   "D")

kq(20, "expert", "What is a Conceptor?",
   "A conceptor is a mathematical function used to compress the data within a reservoir, reducing its dimensionality for faster processing.",
   "A conceptor is a hardware component that accelerates the computation of reservoir dynamics by offloading calculations to a dedicated processor.",
   "A derivation of Reservoir Computing which can store and recall patterns.",
   "A conceptor is a specialized type of neuron within a reservoir that is designed to store and retrieve specific concepts or patterns.",
   "C")

cq(1, "code_plain",
   "I want to train my echo state network on multiple timeseries that have different lengths. I have seen in the documentation that you can put a 3D numpy array with shape (timeseries, timesteps, dimensions), but it wouldn't work in my case as the timeseries have different lengths.",
   "There is no way to do that in ReservoirPy as it is most probably not a good idea to train a model with different lengths and it would induce unexpected results.",
   "You can pass a list of 2D numpy arrays that represents timeseries. As lists can contain numpy arrays of different shapes, you can specify timeseries with different lengths.",
   "You would have to pad every timeseries with zeros and then concatenate them.",
   "As NumPy doesn't support sparse arrays, it is best to use xarray for this use-case.",
   "B")

cq(2, "code_plain",
   "Make me a reservoir, with 1000 neurons, and with a uniform distribution of weights, and a sparsity of 95%.",
   "```python\nfrom reservoirpy as rpy\nreservoir = rpy.nodes.Reservoir(neurons=1_000, connectivity=0.05, weights=\"uniform\")\n```",
   "```python\nfrom reservoirpy as rpy\nreservoir = rpy.nodes.Reservoir(units=1_000, sparsity=0.95, W=rpy.mat_gen.uniform)\n```",
   "```python\nfrom reservoirpy as rpy\nreservoir = rpy.Reservoir(units=1_000, rc_connectivity=0.05, distr=\"uniform\")\n```",
   "```python\nfrom reservoirpy as rpy\nreservoir = rpy.nodes.Reservoir(units=1_000, rc_connectivity=0.05, W=rpy.mat_gen.uniform)\n```",
   "D")

cq(3, "code_plain",
   "Create a model in which there are several reservoirs connected in a chain, and a readout at the end.",
   "```python\nfrom reservoirpy.nodes import Reservoir, Ridge\nmodel = [Reservoir(100, name=\"1\"), Reservoir(100, name=\"2\"),\n         Reservoir(100, name=\"3\"), Reservoir(100, name=\"4\"),\n         Reservoir(100, name=\"5\"), Ridge(ridge=1e-5)]\n```",
   "```python\nfrom reservoirpy.nodes import Reservoir, Ridge\nmodel = Reservoir(100, name=\"1\") >> Reservoir(100, name=\"2\")\n        >> Reservoir(100, name=\"3\") >> Reservoir(100, name=\"4\")\n        >> Reservoir(100, name=\"5\") >> Ridge(ridge=1e-5)\n```",
   "```python\nfrom reservoirpy.nodes import Reservoir, Ridge\nmodel = Reservoir(100) > Reservoir(100) > Reservoir(100)\n        > Reservoir(100) > Reservoir(100) > Ridge(ridge=1e-5)\n```",
   "```python\nfrom reservoirpy.nodes import Reservoir, Ridge\nmodel = Ridge(ridge=1e-5, previous=Reservoir(100, name=\"5\",\n         previous=Reservoir(100, name=\"4\",\n         previous=Reservoir(100, name=\"3\",\n         previous=Reservoir(100, name=\"2\",\n         previous=Reservoir(100, name=\"1\"))))))\n```",
   "B")

cq(4, "code_plain",
   "Write me an echo state network that can efficiently use the many CPU cores my machine has.",
   "```python\nimport reservoirpy as rpy\nrpy.set_param(\"backend\", \"parallel\")\n\nfrom reservoirpy.nodes import ESN\nmodel = ESN(units=100)\nmodel.fit(train_data, train_data)\n```",
   "```python\nfrom reservoirpy.utils import parallel\nfrom reservoirpy.nodes import ESN\nmodel = ESN(units=100)\nwith parallel(n_jobs=-1):\n    model.fit(train_data, train_data)\n```",
   "```python\nfrom reservoirpy.nodes import ESN\nmodel = ESN(units=100, workers=-1)\nmodel.fit(train_data, train_data)\n```",
   "ReservoirPy already parallelizes computation by default to ensure the best performance.",
   "C")

cq(5, "code_plain",
   "I have a model with several trainable readouts inside as such:\n\n```python\nfrom reservoirpy.nodes import Reservoir, Ridge\n\nmodel = Reservoir(100, name=\"R1\") >> Ridge(name=\"readout1\")\nmodel >>= Reservoir(100, name=\"R2\") >> Ridge(name=\"readout2\")\nmodel >>= Reservoir(100, name=\"R3\") >> Ridge(name=\"readout3\")\n```\n\nHow can I fit the model, by specifying the Y values to each Ridge node?",
   "It is not possible to do such a thing in ReservoirPy as it wouldn't make sense.",
   "You can pass a dict as a y parameter: `model.fit(X, {\"readout1\": Y1, \"readout2\": Y2, \"readout3\": Y3, })`.",
   "You would have to fit each part separately before concatenating them.",
   "You can specify the node names as parameters and ReservoirPy will dispatch them correctly: `model.fit(X, readout1=Y1, readout2=Y2, readout3=Y3)`.",
   "B")

cq(6, "code_plain",
   "I have a NumPy array `X` of shape `(timeseries, timesteps, dimensions)` and I want to classify them according to my `Y` array of shape `(timeseries, )` which contains numbers from 0 to 9 according to the class the timeseries belongs to. How can I do that in ReservoirPy?",
   "```python\nfrom reservoirpy.nodes import Reservoir, ScikitLearnNode, Ridge\nfrom sklearn.linear_model import RidgeClassifier\n\nY_ = Y.reshape(-1, 1, 1).repeat(X.shape[1], 1)\n\nmodel = Reservoir(1000, lr=0.9, sr=1.0) >> ScikitLearnNode(RidgeClassifier, model_hypers=dict(alpha=1e-8))\nmodel.fit(X, Y_)\n```",
   "Reservoir Computing is only a framework for timeseries forecasting, it is not suited for classification.",
   "```python\nfrom reservoirpy.nodes import Reservoir, ScikitLearnNode, Ridge\nfrom sklearn.linear_model import RidgeClassifier\n\nmodel = Reservoir(1000, lr=0.9, sr=1.0) >> RidgeClassifier(alpha=1e-8)\nmodel.fit(X, Y)\n```",
   "```python\nfrom reservoirpy.nodes import Reservoir, ScikitLearnNode, Ridge\nfrom sklearn.linear_model import RidgeClassifier\n\nY_ = Y.reshape(-1, 1, 1).repeat(X.shape[1], 1)\n\nmodel = Reservoir(1000, lr=0.9, sr=1.0) >> ScikitLearnNode(RidgeClassifier)\nmodel.fit(X, Y_)\n```",
   "A")

cq(7, "code_debug",
   "Here is my code:\n\n```python\nfrom reservoirpy.nodes import Reservoir, Ridge\n\nmodel = Reservoir(units=200, lr=0.2, sr=1.0) >> Ridge(ridge=1e-4)\n\nfor x_series, y_series in zip(X_train, Y_train):\n    model.fit(x_series, y_series, warmup=10)\n\ny_pred = model.run(X_test[0])\n```\n\nIs that correct?",
   "Calling `.fit` on a model erases the previous trained results. You can instead call `.fit` once by passing the lists `X_train` and `Y_train` as parameters.",
   "Everything is correct!",
   "`.fit` method is not suited for online training. Use `.train` instead.",
   "Reservoir parameters should be written in full form: `leak_rate`, `spectral_radius`.",
   "A")

cq(8, "code_debug",
   "Here is my code:\n\n```python\nfrom reservoirpy.nodes import Reservoir, Ridge\n\nmodel = Reservoir(units=200, lr=0.2, sr=1.0, iss=0.2) >> Ridge(ridge=1e-4)\n\nmodel.fit(X_train, Y_train, warmup=200)\nY_pred = model.run(X_test)\n```\n\nI have an error. What's wrong?",
   "`iss` is not a parameter. For scaling the input, the correct parameter is `scale_factor`.",
   "Reservoir parameters should be written in full form: `leak_rate`, `spectral_radius`, `input_scaling`.",
   "You must first create the reservoir and readout nodes, and then connect them, in three separate lines.",
   "`iss` is not a parameter. For scaling the input, the correct parameter is `input_scaling`.",
   "D")

cq(9, "code_debug",
   "Here is my code:\n\n```python\nfrom reservoirpy.nodes import Reservoir, RLS\n\nmodel = Reservoir(units=200, lr=0.2, sr=1.0) >> RLS(alpha=1e-4)\n\nfor x_series, y_series in zip(X_train, Y_train):\n    model.fit(x_series, y_series, warmup=10)\n\ny_pred = model.run(X_test[0])\n```\n\nI have an error. What's wrong?",
   "The RLS node can only be trained online, but the `.fit` method is for offline training. You should use `.train` instead.",
   "The model has been trained on a list of timeseries but is run on a single timeseries.",
   "There are not enough units inside the reservoir. For this task, having at least 1000 neurons is recommended.",
   "Wrong import path: to import the `Reservoir` node, use `from reservoirpy.nodes.reservoirs import Reservoir`.",
   "A")

_PIPELINE_CODE = (
    "from reservoirpy.nodes import Input, Output, Reservoir, Ridge\n"
    "R1 = Reservoir(100, lr=0.01, sr=1.)\n"
    "R2 = Reservoir(100, lr=0.03, sr=1.)\n"
    "R3 = Reservoir(100, lr=0.09, sr=1.)\n"
    "R4 = Reservoir(100, lr=0.3, sr=1.)\n"
    "R5 = Reservoir(100, lr=0.9, sr=1.)\n"
    "R6 = Reservoir(100, lr=0.01, sr=1.)\n"
    "readout = Ridge(ridge=1e-5, name=\"readout\")\n"
    "\n"
    "path1, path2 = R1 >> R6, R2 >> R5\n"
    "path3 = Input(name=\"input\") >> [R1, R2, R3]\n"
    "path4 = {path4}\n"
    "model = path1 & path2 & path3 & path4\n"
    "\n"
    "model.fit({\"input\": X_train}, {\"readout\": Y_train}, warmup=10)\n"
    "model.run({\"input\": X_test})"
)

cq(10, "code_debug",
   "Here's my code:\n\n```python\n"
   + _PIPELINE_CODE.replace("{path4}", "R1 >> R2 >> R3 >> R4 >> R5 >> R6 >> readout >> Output()")
   + "\n```\n\nIs that correct?",
   "The `.fit` and `.run` methods only take numpy arrays or list of numpy arrays, not dictionaries.",
   "Yes, everything is correct!",
   "There is a circular connection in the model.",
   "`path2` is not defined.",
   "B")

cq(11, "code_debug",
   "Is this the correct usage of the method `partial_fit`?\n\n```python\nreservoir, readout = Reservoir(100, sr=1), Ridge(ridge=1e-8)\n\nfor x, y in zip(X, Y):\n    states = reservoir.run(x)\n    readout.partial_fit(states, y)\n\nreadout.fit()\nmodel = reservoir >> readout\n```",
   "By calling the method `.fit`, the readout forgets its previous training.",
   "The created model won't be fitted.",
   "While it works, it can be simplified by creating the model and calling `partial_fit` on it.",
   "Yes, everything is correctly coded.",
   "D")

cq(12, "code_debug",
   "Here is my code:\n\n```python\nreservoir, readout = Reservoir(100, sr=1), Ridge(ridge=1e-8)\n\nmodel = reservoir >> readout\n\nmodel.fit(X[:800], Y[:800], warmup=10)\n\nsteps = 1000\nresults = np.zeros((steps, 1))\n\nlast_output = X[800]\nfor i in range(steps):\n    last_output = model(last_output)\n    results[i] = last_output\n```\n\nIs that the best way to have a model that generates new values by looping on itself?",
   "No, you can connect the readout to the reservoir in order to loop the results back as an input after training: `readout >> reservoir`.",
   "No, it won't work as the reservoir has an input dimension of 100 and the `results` array containing the results only has its feature dimension set to 1.",
   "You can call the `.autoregress(n=1000)` Model method.",
   "Yes, this is probably the best solution.",
   "D")

cq(13, "code_debug",
   "Here is my code:\n\n```python\nweights = np.random.choice([1, -1], p=[0.6, 1 - 0.6], replace=True, size=(200, 200))\nreservoir = Reservoir(W=weights, sr=0.9, lr=0.6)\n```\n\nI created my reservoir this way, but it seems the reservoir has a very chaotic behavior, even though the spectral radius is below 1.",
   "The rule of the spectral radius <1 holds for matrices with a normal distribution, not a Bernoulli one, which explains why you have a chaotic behavior with a spectral radius of only 1.",
   "The rule of the spectral radius <1 only holds when there is no leak rate, so that explains why you have a chaotic behavior with a spectral radius of only 1.",
   "The parameter `sr` is only valid when no weight matrix has been specified. If a matrix is already specified, this argument is ignored.",
   "The reservoir argument names are incorrect. You should use `spectral_radius` and `leak_rate`.",
   "C")

cq(14, "code_debug",
   "Here's my code:\n\n```python\n"
   + _PIPELINE_CODE.replace("{path4}", "R1 >> R2 >> R4 >> R3 >> R5 >> R6 >> readout >> Output()")
   + "\n```\n\nIs that correct?",
   "The `.fit` and `.run` methods only take numpy arrays or list of numpy arrays, not dictionaries.",
   "Yes, everything is correct!",
   "There is a circular connection in the model.",
   "`path2` is not defined.",
   "B")

out = Path(__file__).resolve().parents[1] / "src" / "graphchat" / "data" / "benchmark_v1.json"
out.write_text(json.dumps(K, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
print(f"wrote {out} ({len(K)} questions)")
