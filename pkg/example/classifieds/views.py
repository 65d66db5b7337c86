import json
import logging
import threading

from django.conf import settings
from django.http import HttpResponse, HttpResponseRedirect, JsonResponse
from django.views.decorators.csrf import csrf_exempt

from sitetools.reasoner import StubReasoner

from . fixture import handle_request, new_state


logger = logging.getLogger(__name__)

STATE = new_state(getattr(settings, 'CLASSIFIEDS_SEED', 0))
# the live server handles requests on several threads
STATE_LOCK = threading.Lock()


def reset(seed=0, **variant):
    """
        restarts the served site from a fresh seeded catalog
    """
    global STATE
    with STATE_LOCK:
        STATE = new_state(seed, **variant)
    return STATE


@csrf_exempt
def site(request, path=''):
    params = request.POST.dict() if request.method == 'POST' \
        else request.GET.dict()
    with STATE_LOCK:
        response, _ = handle_request(STATE, request.method, f'/{path}',
                                     params, request.COOKIES)
    if response.location:
        return HttpResponseRedirect(response.location)
    return HttpResponse(response.html, status=response.status)


@csrf_exempt
def reasoner(request):
    if request.method != 'POST':
        return JsonResponse({'error': 'POST a reasoner request'},
                            status=405)
    try:
        payload = json.loads(request.body.decode())
    except ValueError as e:
        logger.warning(f'Malformed reasoner request: {e}')
        return JsonResponse({'error': str(e)}, status=400)
    rules = getattr(settings, 'SITETOOLS_STUB_REASONER_RULES', [])
    return JsonResponse({'commands': StubReasoner(rules)(payload)})
